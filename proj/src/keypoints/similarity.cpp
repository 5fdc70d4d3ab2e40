#include "a2p/alignment.hpp"
#include "a2p/error.hpp"

#include <cmath>

namespace a2p::keypoints {

double Similarity::angle() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

Similarity Similarity::inverse() const {
  Similarity inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

Similarity Similarity::from_parameters(double scale, double angle, const Eigen::Vector2d& translation) {
  Similarity s;
  s.scale = scale;
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  s.rotation << c, -sn, sn, c;
  s.translation = translation;
  return s;
}

Similarity solve_similarity(std::span<const Point2> points, std::span<const Point2> reference) {
  require(points.size() == reference.size(), ErrorCode::InvalidInput,
          "point and reference sets differ in size");
  require(points.size() >= 2, ErrorCode::InvalidInput, "need at least two correspondences");

  const double n = static_cast<double>(points.size());
  Point2 pm = Point2::Zero();
  Point2 rm = Point2::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    pm += points[i];
    rm += reference[i];
  }
  pm /= n;
  rm /= n;

  // In complex form the optimum is a = sum(conj(p~) r~) / sum |p~|^2, with s R = a.
  double dot = 0.0;
  double cross = 0.0;
  double spread = 0.0;
  double ref_spread = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point2 p = points[i] - pm;
    const Point2 r = reference[i] - rm;
    dot += p.x() * r.x() + p.y() * r.y();
    cross += p.x() * r.y() - p.y() * r.x();
    spread += p.squaredNorm();
    ref_spread += r.squaredNorm();
  }
  const double magnitude = std::hypot(dot, cross);
  if (!(spread > 1e-20 * std::max(1.0, pm.squaredNorm())) ||
      !(ref_spread > 1e-20 * std::max(1.0, rm.squaredNorm())) || magnitude == 0.0) {
    fail(ErrorCode::DegenerateConfiguration, "points are coincident; similarity is undetermined");
  }

  Similarity s;
  s.scale = magnitude / spread;
  s.rotation << dot / magnitude, -cross / magnitude, cross / magnitude, dot / magnitude;
  s.translation = rm - s.scale * (s.rotation * pm);
  return s;
}

double similarity_residual(const Similarity& transform, std::span<const Point2> points,
                           std::span<const Point2> reference) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += (transform.apply(points[i]) - reference[i]).squaredNorm();
  }
  return sum;
}

}  // namespace a2p::keypoints
