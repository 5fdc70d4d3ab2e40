#include "a2p/error.hpp"
#include "a2p/lstm.hpp"

#include <cmath>

namespace a2p::sequence {

AdamMoments AdamMoments::zeros(Eigen::Index size) {
  return {Eigen::VectorXd::Zero(size), Eigen::VectorXd::Zero(size)};
}

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
               AdamMoments& moments, long step, const AdamConfig& config) {
  require(step >= 1, ErrorCode::InvalidInput, "Adam step counter starts at 1");
  require(grads.size() == params.size() && moments.first.size() == params.size() &&
              moments.second.size() == params.size(),
          ErrorCode::InvalidInput, "Adam shapes do not match");
  if (!grads.allFinite()) {
    fail(ErrorCode::NonFiniteGradient, "gradient contains NaN or infinity");
  }
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  moments.first = config.beta1 * moments.first + (1.0 - config.beta1) * grads;
  moments.second = config.beta2 * moments.second + (1.0 - config.beta2) * grads.cwiseAbs2();
  params.array() -= config.learning_rate * (moments.first.array() / c1) /
                    ((moments.second.array() / c2).sqrt() + config.epsilon);
}

}  // namespace a2p::sequence
