#include "a2p/error.hpp"
#include "a2p/predict.hpp"

namespace a2p::sequence {

Eigen::MatrixXd upsample_features(const Eigen::MatrixXd& features, int factor) {
  require(factor >= 1, ErrorCode::InvalidInput, "upsample factor must be >= 1");
  const auto n = features.cols();
  require(n >= 1, ErrorCode::InvalidInput, "no feature frames");
  Eigen::MatrixXd out(features.rows(), n * factor);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& next = features.col(std::min(i + 1, n - 1));
    for (int j = 0; j < factor; ++j) {
      const double w = static_cast<double>(j) / factor;
      out.col(i * factor + j) = (1.0 - w) * features.col(i) + w * next;
    }
  }
  return out;
}

Eigen::MatrixXd predict_coefficients(const NetworkBundle& bundle, const Eigen::MatrixXd& features) {
  require(bundle.motion.has_value(), ErrorCode::InvalidState,
          "network has no attached PCA model and statistics");
  const auto& motion = *bundle.motion;
  const auto& net = bundle.network;
  require(features.rows() == net.input_dim(), ErrorCode::InvalidInput,
          "feature dimension does not match the network");

  const Eigen::MatrixXd ticks = standardize(upsample_features(features, bundle.upsample_factor),
                                            motion.input_stats);
  const int delay = net.time_delay();
  Eigen::MatrixXd padded(ticks.rows(), ticks.cols() + delay);
  padded.leftCols(ticks.cols()) = ticks;
  for (int j = 0; j < delay; ++j) {
    padded.col(ticks.cols() + j) = ticks.col(ticks.cols() - 1);
  }
  const auto result = forward(net, padded, 1, LstmState::zeros(net.hidden_dim(), 1));
  return destandardize(result.outputs.rightCols(ticks.cols()), motion.output_stats);
}

keypoints::KeypointClip predict(const NetworkBundle& bundle, const audio::FeatureSequence& features) {
  require(bundle.motion.has_value(), ErrorCode::InvalidState,
          "network has no attached PCA model and statistics");
  require(std::abs(features.fps - bundle.video_fps()) < 1e-9, ErrorCode::InvalidInput,
          "feature rate does not match the network's video rate");
  const Eigen::MatrixXd coeffs = predict_coefficients(bundle, features.matrix());
  const Eigen::MatrixXd poses = keypoints::reconstruct_all(bundle.motion->pca, coeffs);
  keypoints::KeypointClip clip;
  clip.fps = bundle.tick_rate();
  clip.frames.reserve(static_cast<std::size_t>(poses.cols()));
  for (Eigen::Index t = 0; t < poses.cols(); ++t) {
    clip.frames.push_back(keypoints::KeypointFrame::from_pose(poses.col(t), t));
  }
  return clip;
}

double pixel_error(const std::vector<keypoints::KeypointFrame>& predicted,
                   const std::vector<keypoints::KeypointFrame>& truth) {
  require(predicted.size() == truth.size(), ErrorCode::InvalidInput,
          "predicted has " + std::to_string(predicted.size()) + " frames, ground truth has " +
              std::to_string(truth.size()));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (int p = 0; p < keypoints::kNumPoints; ++p) {
      if (!truth[i].visible[p]) {
        continue;
      }
      sum += (predicted[i].points[p] - truth[i].points[p]).norm();
      ++count;
    }
  }
  require(count > 0, ErrorCode::InvalidInput, "no visible ground-truth points");
  return sum / static_cast<double>(count);
}

}  // namespace a2p::sequence
