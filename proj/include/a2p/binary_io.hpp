#pragma once

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace a2p {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in native little-endian order");

/// Accumulates a little-endian byte stream in memory.
class BinaryWriter {
 public:
  void magic(std::string_view tag);
  void u8(std::uint8_t value);
  void u32(std::uint32_t value);
  void u64(std::uint64_t value);
  void i64(std::int64_t value);
  void f64(double value);
  void str(std::string_view value);  // u32 length + bytes
  void f64s(std::span<const double> values);
  void vector(const Eigen::VectorXd& v);  // u64 size + values
  void matrix(const Eigen::MatrixXd& m);  // u64 rows, u64 cols, column-major values

  const std::string& bytes() const { return buffer_; }

 private:
  void raw(const void* data, std::size_t size);
  std::string buffer_;
};

/// Bounds-checked reader over a byte buffer; truncation raises CorruptFile.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  void expect_magic(std::string_view tag);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64();
  double f64();
  std::string str();
  void f64s(std::span<double> out);
  Eigen::VectorXd vector();
  Eigen::MatrixXd matrix();

  std::size_t position() const { return offset_; }
  std::size_t remaining() const { return data_.size() - offset_; }

 private:
  void raw(void* out, std::size_t size);
  std::string_view data_;
  std::size_t offset_ = 0;
};

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

std::uint32_t crc32_of(std::string_view bytes);

}  // namespace a2p
