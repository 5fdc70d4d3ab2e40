#include "a2p/error.hpp"
#include "a2p/lstm.hpp"

namespace a2p::sequence {

namespace {

void check_pair(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets, int delay) {
  require(delay >= 0, ErrorCode::InvalidInput, "delay must be >= 0");
  require(predictions.rows() == targets.rows(), ErrorCode::InvalidInput,
          "prediction and target dimensions differ");
  require(predictions.cols() == targets.cols(), ErrorCode::InvalidInput,
          "prediction and target lengths differ");
  require(predictions.cols() > delay && predictions.rows() > 0, ErrorCode::InvalidInput,
          "no valid (t, t - delay) pairs");
}

}  // namespace

double loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets, int delay) {
  check_pair(predictions, targets, delay);
  const auto pairs = predictions.cols() - delay;
  const auto diff = predictions.rightCols(pairs) - targets.leftCols(pairs);
  return diff.squaredNorm() / static_cast<double>(pairs * predictions.rows());
}

Eigen::MatrixXd loss_gradient(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets,
                              int delay) {
  check_pair(predictions, targets, delay);
  const auto pairs = predictions.cols() - delay;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(predictions.rows(), predictions.cols());
  grad.rightCols(pairs) = (2.0 / static_cast<double>(pairs * predictions.rows())) *
                          (predictions.rightCols(pairs) - targets.leftCols(pairs));
  return grad;
}

MaskedLoss masked_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets,
                      const std::vector<std::uint8_t>& mask) {
  require(predictions.rows() == targets.rows() && predictions.cols() == targets.cols(),
          ErrorCode::InvalidInput, "prediction and target shapes differ");
  require(mask.size() == static_cast<std::size_t>(predictions.cols()), ErrorCode::InvalidInput,
          "mask length mismatch");
  MaskedLoss out;
  out.gradient = Eigen::MatrixXd::Zero(predictions.rows(), predictions.cols());
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (mask[t] != 0) {
      ++out.pairs;
    }
  }
  if (out.pairs == 0) {
    return out;
  }
  const double norm = 1.0 / static_cast<double>(out.pairs * predictions.rows());
  double sum = 0.0;
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (mask[t] == 0) {
      continue;
    }
    const auto col = static_cast<Eigen::Index>(t);
    const Eigen::VectorXd d = predictions.col(col) - targets.col(col);
    sum += d.squaredNorm();
    out.gradient.col(col) = 2.0 * norm * d;
  }
  out.value = sum * norm;
  return out;
}

}  // namespace a2p::sequence
