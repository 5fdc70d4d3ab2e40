#pragma once

#include "a2p/keypoints.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace a2p::keypoints {

/// x -> scale * rotation * x + translation
struct Similarity {
  double scale = 1.0;
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  double angle() const;
  Point2 apply(const Point2& p) const { return scale * (rotation * p) + translation; }
  Similarity inverse() const;
  static Similarity from_parameters(double scale, double angle, const Eigen::Vector2d& translation);
};

/// Least-squares similarity minimizing sum |s R p_i + T - r_i|^2.
Similarity solve_similarity(std::span<const Point2> points, std::span<const Point2> reference);

/// Sum of squared residuals of `transform` mapping points onto reference.
double similarity_residual(const Similarity& transform, std::span<const Point2> points,
                           std::span<const Point2> reference);

/// Rigid-motion model: V_frame = M(V_audio) with M per frame, camera fixed, V_person = 0.
struct AlignmentModel {
  PoseVector reference_pose;
  /// Reference-to-frame similarity per frame (the inverse of the solved fit).
  std::vector<Similarity> frame_motion;
};

/// Frame minimizing summed pose distance to the others. Large inputs are strided
/// so at most `max_candidates` candidates are scored against `max_samples` frames.
std::size_t medoid_index(const std::vector<KeypointFrame>& frames, std::size_t max_candidates = 512,
                         std::size_t max_samples = 2048);

/// Solves the per-frame similarity on the upper-body points.
AlignmentModel fit_alignment(const std::vector<KeypointFrame>& frames, const PoseVector& reference);

/// Maps each frame into reference coordinates: 100 x frames.
Eigen::MatrixXd remove_rigid(const std::vector<KeypointFrame>& frames, const AlignmentModel& alignment);

}  // namespace a2p::keypoints
