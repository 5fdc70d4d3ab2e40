#pragma once

#include "a2p/binary_io.hpp"
#include "a2p/keypoints.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>

namespace a2p::keypoints {

struct PcaConfig {
  double target_variance = 0.90;
  /// When set, overrides target_variance.
  std::optional<int> fixed_k;
};

struct PcaMotionModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // dim x k, orthonormal columns
  Eigen::VectorXd mode_variances;
  double variance_fraction_captured = 0.0;
  double total_variance = 0.0;
  std::string scope = "corpus";

  int dim() const { return static_cast<int>(mean.size()); }
  int modes() const { return static_cast<int>(components.cols()); }
};

/// `poses` is dim x frames. Population covariance, components sorted by variance.
PcaMotionModel fit_pca(const Eigen::MatrixXd& poses, const PcaConfig& config);

Eigen::VectorXd project(const PcaMotionModel& model, const Eigen::VectorXd& pose);
Eigen::VectorXd reconstruct(const PcaMotionModel& model, const Eigen::VectorXd& coefficients);
/// Column-wise versions.
Eigen::MatrixXd project_all(const PcaMotionModel& model, const Eigen::MatrixXd& poses);
Eigen::MatrixXd reconstruct_all(const PcaMotionModel& model, const Eigen::MatrixXd& coefficients);

/// Piecewise-linear resampling of a dim x n series to dim x ((n-1)*factor + 1).
Eigen::MatrixXd upsample_linear(const Eigen::MatrixXd& series, int factor);

/// Population statistics (divisor n).
struct StandardizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  /// `data` is dim x samples. Zero-spread dimensions raise DegenerateData.
  static StandardizationStats fit(const Eigen::MatrixXd& data);
  int dim() const { return static_cast<int>(mean.size()); }
};

Eigen::MatrixXd standardize(const Eigen::MatrixXd& series, const StandardizationStats& stats);
Eigen::MatrixXd destandardize(const Eigen::MatrixXd& series, const StandardizationStats& stats);

/// Everything needed to map between aligned poses and network targets.
struct MotionModel {
  PoseVector reference_pose;
  PcaMotionModel pca;
  StandardizationStats input_stats;
  StandardizationStats output_stats;
};

inline constexpr std::uint32_t kMotionFileVersion = 1;

/// Embeddable encoding (no magic), shared with the network file.
void encode_motion_model(BinaryWriter& w, const MotionModel& model);
MotionModel decode_motion_model(BinaryReader& r);

void write_motion_model(const std::filesystem::path& path, const MotionModel& model);
MotionModel read_motion_model(const std::filesystem::path& path);
std::string motion_model_json(const MotionModel& model);

}  // namespace a2p::keypoints
