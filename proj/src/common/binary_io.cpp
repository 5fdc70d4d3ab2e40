#include "a2p/binary_io.hpp"

#include "a2p/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace a2p {

namespace {

// Upper bound on element counts read from files; guards allocation on corrupt input.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

}  // namespace

void BinaryWriter::raw(const void* data, std::size_t size) {
  buffer_.append(static_cast<const char*>(data), size);
}

void BinaryWriter::magic(std::string_view tag) { raw(tag.data(), tag.size()); }
void BinaryWriter::u8(std::uint8_t value) { raw(&value, sizeof value); }
void BinaryWriter::u32(std::uint32_t value) { raw(&value, sizeof value); }
void BinaryWriter::u64(std::uint64_t value) { raw(&value, sizeof value); }
void BinaryWriter::i64(std::int64_t value) { raw(&value, sizeof value); }
void BinaryWriter::f64(double value) { raw(&value, sizeof value); }

void BinaryWriter::str(std::string_view value) {
  u32(static_cast<std::uint32_t>(value.size()));
  raw(value.data(), value.size());
}

void BinaryWriter::f64s(std::span<const double> values) {
  raw(values.data(), values.size_bytes());
}

void BinaryWriter::vector(const Eigen::VectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  f64s({v.data(), static_cast<std::size_t>(v.size())});
}

void BinaryWriter::matrix(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  f64s({m.data(), static_cast<std::size_t>(m.size())});
}

void BinaryReader::raw(void* out, std::size_t size) {
  if (size > remaining()) {
    fail(ErrorCode::CorruptFile, "unexpected end of data");
  }
  std::memcpy(out, data_.data() + offset_, size);
  offset_ += size;
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  raw(got.data(), got.size());
  if (got != tag) {
    fail(ErrorCode::CorruptFile, "bad magic: expected '" + std::string(tag) + "'");
  }
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v;
  raw(&v, sizeof v);
  return v;
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  raw(&v, sizeof v);
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  raw(&v, sizeof v);
  return v;
}

std::int64_t BinaryReader::i64() {
  std::int64_t v;
  raw(&v, sizeof v);
  return v;
}

double BinaryReader::f64() {
  double v;
  raw(&v, sizeof v);
  return v;
}

std::string BinaryReader::str() {
  const auto n = u32();
  if (n > remaining()) {
    fail(ErrorCode::CorruptFile, "string length exceeds data");
  }
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

void BinaryReader::f64s(std::span<double> out) { raw(out.data(), out.size_bytes()); }

Eigen::VectorXd BinaryReader::vector() {
  const auto n = u64();
  if (n > kMaxElements || n * sizeof(double) > remaining()) {
    fail(ErrorCode::CorruptFile, "vector size exceeds data");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  f64s({v.data(), static_cast<std::size_t>(n)});
  return v;
}

Eigen::MatrixXd BinaryReader::matrix() {
  const auto rows = u64();
  const auto cols = u64();
  if (rows > kMaxElements || cols > kMaxElements ||
      (cols != 0 && rows > kMaxElements / cols) ||
      rows * cols * sizeof(double) > remaining()) {
    fail(ErrorCode::CorruptFile, "matrix size exceeds data");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  f64s({m.data(), static_cast<std::size_t>(m.size())});
  return m;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::IoError, "cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    fail(ErrorCode::IoError, "write failed for " + path.string());
  }
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded pieces.
  constexpr std::size_t kPiece = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kPiece) {
    const auto n = std::min(kPiece, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace a2p
