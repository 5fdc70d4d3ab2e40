#include "a2p/error.hpp"
#include "a2p/parallel.hpp"
#include "a2p/pipeline.hpp"

#include <cmath>
#include <map>

namespace a2p::pipeline {

using keypoints::KeypointFrame;
using keypoints::kNumPoints;

SplitErrors evaluate_splits(const sequence::NetworkBundle& bundle, const PreparedDataset& ds, unsigned workers) {
  require(bundle.motion.has_value(), ErrorCode::InvalidState, "network has no attached motion model");
  const int factor = bundle.upsample_factor;
  struct Sums {
    double sum[4] = {0, 0, 0, 0};
    std::size_t count[4] = {0, 0, 0, 0};
  };
  std::vector<Sums> per_clip(ds.clips.size());
  parallel_for(ds.clips.size(), workers, [&](std::size_t i) {
    const auto& clip = ds.clips[i];
    if (clip.aligned.empty()) {
      return;
    }
    const Eigen::MatrixXd coeffs = sequence::predict_coefficients(bundle, clip.features.matrix());
    auto& s = per_clip[i];
    for (const auto& truth : clip.aligned) {
      const auto frame = static_cast<std::size_t>(truth.frame_index);
      const int split = static_cast<int>(clip.split_of_frame(frame));
      if (split == static_cast<int>(Split::Unused)) {
        continue;
      }
      const Eigen::VectorXd pose =
          keypoints::reconstruct(bundle.motion->pca, coeffs.col(static_cast<Eigen::Index>(frame) * factor));
      for (int p = 0; p < kNumPoints; ++p) {
        if (!truth.visible[p]) {
          continue;
        }
        const keypoints::Point2 q(pose[2 * p], pose[2 * p + 1]);
        s.sum[split] += (q - truth.points[p]).norm();
        s.count[split] += 1;
      }
    }
  });
  Sums total;
  for (const auto& s : per_clip) {
    for (int k = 0; k < 4; ++k) {
      total.sum[k] += s.sum[k];
      total.count[k] += s.count[k];
    }
  }
  auto mean = [&](Split split) {
    const int k = static_cast<int>(split);
    return total.count[k] > 0 ? total.sum[k] / static_cast<double>(total.count[k])
                              : std::numeric_limits<double>::quiet_NaN();
  };
  return {mean(Split::Train), mean(Split::Valid), mean(Split::Test)};
}

AlignedPairs pair_by_frame_index(const keypoints::KeypointClip& predicted, const keypoints::KeypointClip& truth) {
  require(predicted.fps > 0.0 && truth.fps > 0.0, ErrorCode::InvalidInput, "frame rates must be positive");
  const double ratio = predicted.fps / truth.fps;
  const auto step = static_cast<std::int64_t>(std::llround(ratio));
  require(step >= 1 && std::abs(ratio - static_cast<double>(step)) < 1e-9, ErrorCode::InvalidInput,
          "prediction rate " + std::to_string(predicted.fps) + " is not an integer multiple of " +
              std::to_string(truth.fps));
  std::map<std::int64_t, const KeypointFrame*> by_index;
  for (const auto& f : predicted.frames) {
    by_index[f.frame_index] = &f;
  }
  AlignedPairs pairs;
  for (const auto& t : truth.frames) {
    const auto it = by_index.find(t.frame_index * step);
    require(it != by_index.end(), ErrorCode::InvalidInput,
            "no prediction for ground-truth frame " + std::to_string(t.frame_index) + " (prediction has " +
                std::to_string(predicted.frames.size()) + " frames at " + std::to_string(predicted.fps) +
                " fps, ground truth has " + std::to_string(truth.frames.size()) + " at " +
                std::to_string(truth.fps) + " fps)");
    pairs.predicted.push_back(*it->second);
    pairs.truth.push_back(t);
  }
  return pairs;
}

double pose_std(const std::vector<KeypointFrame>& frames) {
  std::array<keypoints::Point2, kNumPoints> mean;
  std::array<std::size_t, kNumPoints> count{};
  mean.fill(keypoints::Point2::Zero());
  for (const auto& f : frames) {
    for (int p = 0; p < kNumPoints; ++p) {
      if (f.visible[p]) {
        mean[p] += f.points[p];
        ++count[p];
      }
    }
  }
  for (int p = 0; p < kNumPoints; ++p) {
    if (count[p] > 0) {
      mean[p] /= static_cast<double>(count[p]);
    }
  }
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    for (int p = 0; p < kNumPoints; ++p) {
      if (f.visible[p]) {
        sq += (f.points[p] - mean[p]).squaredNorm();
        ++n;
      }
    }
  }
  require(n > 0, ErrorCode::InvalidInput, "no visible points");
  return std::sqrt(sq / static_cast<double>(n));
}

}  // namespace a2p::pipeline
