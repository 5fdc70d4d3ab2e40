#include "a2p/error.hpp"
#include "a2p/retarget.hpp"

#include <cmath>

namespace a2p::retarget {

Quat look_at(const Vec3& source, const Vec3& target, const Vec3& up) {
  const Vec3 d = target - source;
  const double len = d.norm();
  require(len > 0.0 && std::isfinite(len), ErrorCode::DegenerateConfiguration,
          "look-at source and target coincide");
  const Vec3 forward = d / len;

  Vec3 right = up.cross(forward);
  if (right.norm() < 1e-9 * std::max(1.0, up.norm())) {
    // Forward parallel to the hint: use the world axis least aligned with forward.
    Eigen::Index axis = 0;
    forward.cwiseAbs().minCoeff(&axis);
    right = Vec3::Unit(axis).cross(forward);
  }
  right.normalize();
  const Vec3 true_up = forward.cross(right);

  Eigen::Matrix3d basis;
  basis.col(0) = right;
  basis.col(1) = true_up;
  basis.col(2) = forward;
  Quat q(basis);
  q.normalize();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

}  // namespace a2p::retarget
