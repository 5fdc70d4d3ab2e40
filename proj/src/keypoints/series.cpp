#include "a2p/error.hpp"
#include "a2p/motion.hpp"

#include <algorithm>
#include <cmath>

namespace a2p::keypoints {

Eigen::MatrixXd upsample_linear(const Eigen::MatrixXd& series, int factor) {
  require(factor >= 1, ErrorCode::InvalidInput, "upsample factor must be >= 1");
  const auto n = series.cols();
  require(n >= 1, ErrorCode::InvalidInput, "cannot upsample an empty series");
  Eigen::MatrixXd out(series.rows(), (n - 1) * factor + 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    out.col(i * factor) = series.col(i);
    for (int j = 1; j < factor; ++j) {
      const double w = static_cast<double>(j) / factor;
      out.col(i * factor + j) = (1.0 - w) * series.col(i) + w * series.col(i + 1);
    }
  }
  out.col((n - 1) * factor) = series.col(n - 1);
  return out;
}

StandardizationStats StandardizationStats::fit(const Eigen::MatrixXd& data) {
  require(data.cols() >= 1 && data.rows() >= 1, ErrorCode::InvalidInput,
          "cannot fit statistics on empty data");
  StandardizationStats stats;
  stats.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - stats.mean;
  stats.std = (centered.rowwise().squaredNorm() / static_cast<double>(data.cols())).cwiseSqrt();
  for (Eigen::Index d = 0; d < stats.std.size(); ++d) {
    if (!(stats.std[d] > 1e-12 * std::max(1.0, std::abs(stats.mean[d])))) {
      fail(ErrorCode::DegenerateData, "dimension " + std::to_string(d) + " has zero spread");
    }
  }
  return stats;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& series, const StandardizationStats& stats) {
  require(series.rows() == stats.dim(), ErrorCode::InvalidInput, "series dimension mismatch");
  return (series.colwise() - stats.mean).array().colwise() / stats.std.array();
}

Eigen::MatrixXd destandardize(const Eigen::MatrixXd& series, const StandardizationStats& stats) {
  require(series.rows() == stats.dim(), ErrorCode::InvalidInput, "series dimension mismatch");
  return (series.array().colwise() * stats.std.array()).matrix().colwise() + stats.mean;
}

}  // namespace a2p::keypoints
