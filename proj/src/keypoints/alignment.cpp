#include "a2p/alignment.hpp"
#include "a2p/error.hpp"

#include <algorithm>
#include <limits>

namespace a2p::keypoints {

namespace {

std::vector<std::size_t> strided(std::size_t n, std::size_t limit) {
  std::vector<std::size_t> idx;
  const std::size_t count = std::min(n, limit);
  idx.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    idx.push_back(i * n / count);
  }
  return idx;
}

}  // namespace

std::size_t medoid_index(const std::vector<KeypointFrame>& frames, std::size_t max_candidates,
                         std::size_t max_samples) {
  require(!frames.empty(), ErrorCode::InvalidInput, "medoid of an empty frame set");
  std::vector<PoseVector> poses;
  poses.reserve(frames.size());
  for (const auto& f : frames) {
    poses.push_back(f.pose());
  }
  const auto candidates = strided(frames.size(), max_candidates);
  const auto samples = strided(frames.size(), max_samples);

  std::size_t best = candidates.front();
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c : candidates) {
    double cost = 0.0;
    for (std::size_t s : samples) {
      cost += (poses[c] - poses[s]).norm();
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

AlignmentModel fit_alignment(const std::vector<KeypointFrame>& frames, const PoseVector& reference) {
  AlignmentModel model;
  model.reference_pose = reference;
  model.frame_motion.reserve(frames.size());

  std::vector<Point2> pts;
  std::vector<Point2> ref;
  for (const auto& f : frames) {
    pts.clear();
    ref.clear();
    for (int p = 0; p < kUpperBodyPoints; ++p) {
      if (f.visible[p]) {
        pts.push_back(f.points[p]);
        ref.emplace_back(reference[2 * p], reference[2 * p + 1]);
      }
    }
    require(pts.size() >= 2, ErrorCode::InvalidInput,
            "frame " + std::to_string(f.frame_index) + " has fewer than two visible body points");
    model.frame_motion.push_back(solve_similarity(pts, ref).inverse());
  }
  return model;
}

Eigen::MatrixXd remove_rigid(const std::vector<KeypointFrame>& frames, const AlignmentModel& alignment) {
  require(alignment.frame_motion.size() == frames.size(), ErrorCode::InvalidInput,
          "alignment has " + std::to_string(alignment.frame_motion.size()) + " similarities for " +
              std::to_string(frames.size()) + " frames");
  Eigen::MatrixXd out(kPoseDim, static_cast<Eigen::Index>(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Similarity to_reference = alignment.frame_motion[i].inverse();
    const auto col = static_cast<Eigen::Index>(i);
    for (int p = 0; p < kNumPoints; ++p) {
      const Point2 q = to_reference.apply(frames[i].points[p]);
      out(2 * p, col) = q.x();
      out(2 * p + 1, col) = q.y();
    }
  }
  return out;
}

}  // namespace a2p::keypoints
