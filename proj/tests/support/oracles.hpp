#pragma once

#include "a2p/keypoints.hpp"

#include <Eigen/Core>

#include <random>
#include <vector>

namespace a2p::testing {

/// Straight-line MFCC: direct DFT, hand-built mel bank, textbook DCT-II.
/// Returns frames x num_ceps and fills `log_energy` when given.
Eigen::MatrixXd mfcc_oracle(const std::vector<double>& samples, double sample_rate, double fps,
                            int num_filters, int num_ceps, double log_floor,
                            Eigen::VectorXd* log_energy = nullptr);

/// Population covariance by explicit double loops; `data` is dim x samples.
Eigen::MatrixXd covariance_oracle(const Eigen::MatrixXd& data);

/// Cyclic Jacobi eigensolver, eigenpairs sorted by decreasing eigenvalue.
void jacobi_eigen(const Eigen::MatrixXd& symmetric, Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

/// Orthonormal basis of the column span by modified Gram-Schmidt.
Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& columns);

/// Largest principal angle (radians) between the column spans of two orthonormal bases.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct GradientCheck {
  int parameters = 0;
  double max_relative_error = 0.0;
};

/// Random LSTM and data; compares backward() against central differences of loss().
GradientCheck check_lstm_gradient(std::mt19937_64& rng, int input_dim, int hidden_dim, int output_dim,
                                  int delay, int steps, int batch, double eps = 1e-5);

double uniform(std::mt19937_64& rng, double lo, double hi);
double gaussian(std::mt19937_64& rng);

/// Frame with every point visible at the given pose.
keypoints::KeypointFrame visible_frame(const keypoints::PoseVector& pose, std::int64_t index);

}  // namespace a2p::testing
