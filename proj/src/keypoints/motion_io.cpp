#include "a2p/error.hpp"
#include "a2p/motion.hpp"

#include <json.hpp>

namespace a2p::keypoints {

namespace {

void encode_stats(BinaryWriter& w, const StandardizationStats& s) {
  w.vector(s.mean);
  w.vector(s.std);
}

StandardizationStats decode_stats(BinaryReader& r) {
  StandardizationStats s;
  s.mean = r.vector();
  s.std = r.vector();
  require(s.mean.size() == s.std.size(), ErrorCode::CorruptFile, "stats size mismatch");
  return s;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void encode_motion_model(BinaryWriter& w, const MotionModel& model) {
  w.str(model.pca.scope);
  w.vector(model.reference_pose);
  w.vector(model.pca.mean);
  w.matrix(model.pca.components);
  w.vector(model.pca.mode_variances);
  w.f64(model.pca.variance_fraction_captured);
  w.f64(model.pca.total_variance);
  encode_stats(w, model.input_stats);
  encode_stats(w, model.output_stats);
}

MotionModel decode_motion_model(BinaryReader& r) {
  MotionModel m;
  m.pca.scope = r.str();
  const Eigen::VectorXd ref = r.vector();
  require(ref.size() == kPoseDim, ErrorCode::CorruptFile, "reference pose is not 100-D");
  m.reference_pose = ref;
  m.pca.mean = r.vector();
  m.pca.components = r.matrix();
  m.pca.mode_variances = r.vector();
  m.pca.variance_fraction_captured = r.f64();
  m.pca.total_variance = r.f64();
  require(m.pca.components.rows() == m.pca.mean.size() &&
              m.pca.mode_variances.size() == m.pca.components.cols(),
          ErrorCode::CorruptFile, "PCA dimensions are inconsistent");
  m.input_stats = decode_stats(r);
  m.output_stats = decode_stats(r);
  require(m.output_stats.dim() == m.pca.modes(), ErrorCode::CorruptFile,
          "output statistics do not match the PCA mode count");
  return m;
}

void write_motion_model(const std::filesystem::path& path, const MotionModel& model) {
  BinaryWriter body;
  encode_motion_model(body, model);
  BinaryWriter w;
  w.magic("A2PM");
  w.u32(kMotionFileVersion);
  w.u32(crc32_of(body.bytes()));
  write_file_bytes(path, w.bytes() + body.bytes());
}

MotionModel read_motion_model(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  BinaryReader header(bytes);
  header.expect_magic("A2PM");
  const auto version = header.u32();
  require(version == kMotionFileVersion, ErrorCode::CorruptFile,
          "unsupported motion model version " + std::to_string(version));
  const auto crc = header.u32();
  const std::string_view body = std::string_view(bytes).substr(header.position());
  require(crc32_of(body) == crc, ErrorCode::CorruptFile,
          path.string() + ": checksum mismatch, file is corrupt");
  BinaryReader r(body);
  return decode_motion_model(r);
}

std::string motion_model_json(const MotionModel& model) {
  nlohmann::ordered_json j;
  j["scope"] = model.pca.scope;
  j["modes"] = model.pca.modes();
  j["variance_fraction_captured"] = model.pca.variance_fraction_captured;
  j["total_variance"] = model.pca.total_variance;
  j["mode_variances"] = to_std(model.pca.mode_variances);
  j["mean"] = to_std(model.pca.mean);
  auto comps = nlohmann::ordered_json::array();
  for (Eigen::Index c = 0; c < model.pca.components.cols(); ++c) {
    comps.push_back(to_std(model.pca.components.col(c)));
  }
  j["components"] = std::move(comps);
  j["reference_pose"] = to_std(model.reference_pose);
  j["input_stats"] = {{"mean", to_std(model.input_stats.mean)}, {"std", to_std(model.input_stats.std)}};
  j["output_stats"] = {{"mean", to_std(model.output_stats.mean)}, {"std", to_std(model.output_stats.std)}};
  return j.dump(2);
}

}  // namespace a2p::keypoints
