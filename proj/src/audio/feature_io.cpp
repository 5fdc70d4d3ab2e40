#include "a2p/audio.hpp"
#include "a2p/binary_io.hpp"
#include "a2p/error.hpp"

#include <fstream>
#include <iomanip>

namespace a2p::audio {

void write_feature_file(const std::filesystem::path& path, const FeatureSequence& features) {
  BinaryWriter w;
  w.magic("A2PF");
  w.u32(kFeatureFileVersion);
  w.u64(features.frames.size());
  w.u32(kFeatureDim);
  w.f64(features.fps);
  for (const auto& f : features.frames) {
    w.f64s(f.values);
  }
  write_file_bytes(path, w.bytes());
}

FeatureSequence read_feature_file(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  BinaryReader r(bytes);
  r.expect_magic("A2PF");
  const auto version = r.u32();
  require(version == kFeatureFileVersion, ErrorCode::CorruptFile,
          "unsupported feature file version " + std::to_string(version));
  const auto count = r.u64();
  const auto dim = r.u32();
  require(dim == kFeatureDim, ErrorCode::CorruptFile, "feature dimension is not 28");
  FeatureSequence seq;
  seq.fps = r.f64();
  require(seq.fps > 0.0, ErrorCode::CorruptFile, "non-positive fps");
  require(count * kFeatureDim * sizeof(double) == r.remaining(), ErrorCode::CorruptFile,
          "feature payload size does not match header");
  seq.frames.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    r.f64s(seq.frames[i].values);
    seq.frames[i].timestamp = (static_cast<double>(i) + 0.5) / seq.fps;
  }
  return seq;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureSequence& features) {
  std::ofstream out(path);
  if (!out) {
    fail(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << "timestamp";
  for (int c = 0; c < kMfccCount; ++c) out << ",mfcc" << c;
  for (int c = 0; c < kMfccCount; ++c) out << ",dmfcc" << c;
  out << ",log_energy,dlog_energy\n";
  out << std::setprecision(17);
  for (const auto& f : features.frames) {
    out << f.timestamp;
    for (double v : f.values) out << ',' << v;
    out << '\n';
  }
}

}  // namespace a2p::audio
