#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace a2p::sequence {

/// Offsets of each parameter block inside the flat parameter vector.
struct ParameterLayout {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  Eigen::Index w_x = 0;   // 4h x in
  Eigen::Index w_h = 0;   // 4h x h
  Eigen::Index b = 0;     // 4h
  Eigen::Index w_fc = 0;  // out x h
  Eigen::Index b_fc = 0;  // out
  Eigen::Index total = 0;

  ParameterLayout() = default;
  ParameterLayout(int input, int hidden, int output);
};

/// Single-layer unidirectional LSTM followed by a linear output layer.
/// Gate rows are stacked [input, forget, output, candidate].
class LstmModel {
 public:
  LstmModel() = default;
  LstmModel(int input_dim, int hidden_dim, int output_dim, int time_delay = 0);

  /// Uniform(+-1/sqrt(fan_in)) weights, zero biases except forget gate = +1.
  static LstmModel initialize(int input_dim, int hidden_dim, int output_dim, int time_delay,
                              std::uint64_t seed);

  int input_dim() const { return layout_.input_dim; }
  int hidden_dim() const { return layout_.hidden_dim; }
  int output_dim() const { return layout_.output_dim; }
  int time_delay() const { return time_delay_; }
  void set_time_delay(int delay);
  const ParameterLayout& layout() const { return layout_; }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  MatrixMap w_x() { return block(layout_.w_x, 4 * hidden_dim(), input_dim()); }
  MatrixMap w_h() { return block(layout_.w_h, 4 * hidden_dim(), hidden_dim()); }
  VectorMap b() { return VectorMap(params_.data() + layout_.b, 4 * hidden_dim()); }
  MatrixMap w_fc() { return block(layout_.w_fc, output_dim(), hidden_dim()); }
  VectorMap b_fc() { return VectorMap(params_.data() + layout_.b_fc, output_dim()); }

  ConstMatrixMap w_x() const { return cblock(layout_.w_x, 4 * hidden_dim(), input_dim()); }
  ConstMatrixMap w_h() const { return cblock(layout_.w_h, 4 * hidden_dim(), hidden_dim()); }
  ConstVectorMap b() const { return ConstVectorMap(params_.data() + layout_.b, 4 * hidden_dim()); }
  ConstMatrixMap w_fc() const { return cblock(layout_.w_fc, output_dim(), hidden_dim()); }
  ConstVectorMap b_fc() const { return ConstVectorMap(params_.data() + layout_.b_fc, output_dim()); }

 private:
  MatrixMap block(Eigen::Index offset, Eigen::Index rows, Eigen::Index cols) {
    return MatrixMap(params_.data() + offset, rows, cols);
  }
  ConstMatrixMap cblock(Eigen::Index offset, Eigen::Index rows, Eigen::Index cols) const {
    return ConstMatrixMap(params_.data() + offset, rows, cols);
  }

  ParameterLayout layout_;
  int time_delay_ = 0;
  Eigen::VectorXd params_;
};

/// Hidden and cell state, hidden x batch.
struct LstmState {
  Eigen::MatrixXd h;
  Eigen::MatrixXd c;

  static LstmState zeros(int hidden_dim, int batch);
};

/// Activations kept from a forward pass for backpropagation over one window.
struct ForwardCache {
  bool filled = false;
  int steps = 0;
  int batch = 0;
  Eigen::MatrixXd inputs;  // in x (steps * batch)
  Eigen::MatrixXd gates;   // 4h x (steps * batch), post-activation
  Eigen::MatrixXd cells;   // h x (steps * batch)
  Eigen::MatrixXd hidden;  // h x (steps * batch)
  Eigen::MatrixXd h0;
  Eigen::MatrixXd c0;
  std::vector<std::uint8_t> reset;
};

struct ForwardResult {
  Eigen::MatrixXd outputs;  // out x (steps * batch)
  LstmState final_state;
};

/// Runs the recurrence over `inputs` laid out time-major: column t * batch + lane.
/// A nonzero `reset[t * batch + lane]` zeroes that lane's state before step t.
/// Output column t is the network's estimate for target frame t - time_delay.
ForwardResult forward(const LstmModel& model, const Eigen::MatrixXd& inputs, int batch,
                      const LstmState& initial, ForwardCache* cache = nullptr,
                      const std::vector<std::uint8_t>* reset = nullptr);

/// Exact gradient of the window loss with respect to every parameter, given
/// dL/d(outputs). Gradients do not flow into the window's initial state.
Eigen::VectorXd backward(const LstmModel& model, const ForwardCache& cache,
                         const Eigen::MatrixXd& output_grad);

/// MSE over pairs (t, t - delay): outputs column t against targets column t - delay.
double loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets, int delay);
Eigen::MatrixXd loss_gradient(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets,
                              int delay);

struct MaskedLoss {
  double value = 0.0;
  std::size_t pairs = 0;
  Eigen::MatrixXd gradient;
};

/// MSE over columns with mask != 0; targets already aligned with predictions.
MaskedLoss masked_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets,
                      const std::vector<std::uint8_t>& mask);

struct AdamConfig {
  double learning_rate = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  Eigen::VectorXd first;
  Eigen::VectorXd second;

  static AdamMoments zeros(Eigen::Index size);
};

/// Bias-corrected Adam update; `step` counts from 1. Non-finite gradients raise
/// NonFiniteGradient before anything is modified.
void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
               AdamMoments& moments, long step, const AdamConfig& config);

}  // namespace a2p::sequence
