#include "a2p/error.hpp"
#include "a2p/motion.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace a2p::keypoints {

PcaMotionModel fit_pca(const Eigen::MatrixXd& poses, const PcaConfig& config) {
  const auto dim = poses.rows();
  const auto frames = poses.cols();
  require(dim >= 1 && frames >= 1, ErrorCode::InvalidInput, "empty pose matrix");
  require(poses.allFinite(), ErrorCode::InvalidInput, "pose matrix contains non-finite values");
  if (config.fixed_k) {
    require(*config.fixed_k >= 1, ErrorCode::InvalidInput, "fixed_k must be >= 1");
  } else {
    require(config.target_variance > 0.0 && config.target_variance <= 1.0, ErrorCode::InvalidInput,
            "target_variance must be in (0, 1]");
  }

  PcaMotionModel model;
  model.mean = poses.rowwise().mean();
  const Eigen::MatrixXd centered = poses.colwise() - model.mean;
  const Eigen::MatrixXd cov = (centered * centered.transpose()) / static_cast<double>(frames);
  const double total = cov.trace();
  const double scale = 1.0 + model.mean.squaredNorm() / static_cast<double>(dim);
  if (!(total > 1e-20 * scale)) {
    fail(ErrorCode::DegenerateData, "all poses are identical; no variance to model");
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  require(eig.info() == Eigen::Success, ErrorCode::DegenerateData, "eigendecomposition failed");
  // Eigen returns ascending order.
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  int k = 0;
  if (config.fixed_k) {
    k = std::min<int>(*config.fixed_k, static_cast<int>(dim));
  } else {
    double cumulative = 0.0;
    for (k = 0; k < dim;) {
      cumulative += values[k++];
      if (cumulative / total >= config.target_variance - 1e-12) {
        break;
      }
    }
  }

  model.components.resize(dim, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = vectors.col(j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) {
      v = -v;
    }
    model.components.col(j) = v;
  }
  model.mode_variances = values.head(k);
  model.total_variance = total;
  model.variance_fraction_captured = std::min(1.0, model.mode_variances.sum() / total);
  return model;
}

namespace {

void check_model(const PcaMotionModel& model) {
  require(model.mean.size() > 0 && model.components.rows() == model.mean.size(),
          ErrorCode::InvalidState, "PCA model is not fitted");
}

}  // namespace

Eigen::VectorXd project(const PcaMotionModel& model, const Eigen::VectorXd& pose) {
  check_model(model);
  require(pose.size() == model.mean.size(), ErrorCode::InvalidInput, "pose dimension mismatch");
  return model.components.transpose() * (pose - model.mean);
}

Eigen::VectorXd reconstruct(const PcaMotionModel& model, const Eigen::VectorXd& coefficients) {
  check_model(model);
  require(coefficients.size() == model.modes(), ErrorCode::InvalidInput,
          "coefficient count does not match the model");
  return model.mean + model.components * coefficients;
}

Eigen::MatrixXd project_all(const PcaMotionModel& model, const Eigen::MatrixXd& poses) {
  check_model(model);
  require(poses.rows() == model.mean.size(), ErrorCode::InvalidInput, "pose dimension mismatch");
  return model.components.transpose() * (poses.colwise() - model.mean);
}

Eigen::MatrixXd reconstruct_all(const PcaMotionModel& model, const Eigen::MatrixXd& coefficients) {
  check_model(model);
  require(coefficients.rows() == model.modes(), ErrorCode::InvalidInput,
          "coefficient count does not match the model");
  return (model.components * coefficients).colwise() + model.mean;
}

}  // namespace a2p::keypoints
