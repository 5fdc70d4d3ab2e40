#include "a2p/error.hpp"
#include "a2p/lstm.hpp"

#include <cmath>
#include <random>

namespace a2p::sequence {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 / (1.0 + (-x).exp());
}

void apply_reset(Eigen::MatrixXd& h, Eigen::MatrixXd& c, const std::vector<std::uint8_t>* reset,
                 int t, int batch) {
  if (reset == nullptr) {
    return;
  }
  for (int lane = 0; lane < batch; ++lane) {
    if ((*reset)[static_cast<std::size_t>(t) * batch + lane] != 0) {
      h.col(lane).setZero();
      c.col(lane).setZero();
    }
  }
}

}  // namespace

ParameterLayout::ParameterLayout(int input, int hidden, int output)
    : input_dim(input), hidden_dim(hidden), output_dim(output) {
  const Eigen::Index g = 4 * static_cast<Eigen::Index>(hidden);
  w_x = 0;
  w_h = w_x + g * input;
  b = w_h + g * hidden;
  w_fc = b + g;
  b_fc = w_fc + static_cast<Eigen::Index>(output) * hidden;
  total = b_fc + output;
}

LstmModel::LstmModel(int input_dim, int hidden_dim, int output_dim, int time_delay)
    : layout_(input_dim, hidden_dim, output_dim) {
  require(input_dim >= 1 && hidden_dim >= 1 && output_dim >= 1, ErrorCode::InvalidInput,
          "LSTM dimensions must be positive");
  set_time_delay(time_delay);
  params_ = Eigen::VectorXd::Zero(layout_.total);
}

void LstmModel::set_time_delay(int delay) {
  require(delay >= 0, ErrorCode::InvalidInput, "time delay must be >= 0");
  time_delay_ = delay;
}

LstmModel LstmModel::initialize(int input_dim, int hidden_dim, int output_dim, int time_delay,
                                std::uint64_t seed) {
  LstmModel m(input_dim, hidden_dim, output_dim, time_delay);
  std::mt19937_64 rng(seed);
  const double gate_bound = 1.0 / std::sqrt(static_cast<double>(input_dim + hidden_dim));
  const double fc_bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  auto fill = [&](auto&& block, double bound) {
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) {
        block(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
      }
    }
  };
  fill(m.w_x(), gate_bound);
  fill(m.w_h(), gate_bound);
  m.b().setZero();
  m.b().segment(hidden_dim, hidden_dim).setConstant(1.0);
  fill(m.w_fc(), fc_bound);
  m.b_fc().setZero();
  return m;
}

LstmState LstmState::zeros(int hidden_dim, int batch) {
  return {Eigen::MatrixXd::Zero(hidden_dim, batch), Eigen::MatrixXd::Zero(hidden_dim, batch)};
}

ForwardResult forward(const LstmModel& model, const Eigen::MatrixXd& inputs, int batch,
                      const LstmState& initial, ForwardCache* cache,
                      const std::vector<std::uint8_t>* reset) {
  const int h = model.hidden_dim();
  require(batch >= 1, ErrorCode::InvalidInput, "batch must be >= 1");
  require(inputs.rows() == model.input_dim(), ErrorCode::InvalidInput,
          "input dimension " + std::to_string(inputs.rows()) + " != model input " +
              std::to_string(model.input_dim()));
  require(inputs.cols() % batch == 0, ErrorCode::InvalidInput,
          "input columns are not a multiple of the batch");
  require(initial.h.rows() == h && initial.h.cols() == batch && initial.c.rows() == h &&
              initial.c.cols() == batch,
          ErrorCode::InvalidInput, "initial state does not match hidden_dim x batch");
  require(inputs.allFinite(), ErrorCode::InvalidInput, "non-finite network input");
  const int steps = static_cast<int>(inputs.cols() / batch);
  if (reset != nullptr) {
    require(reset->size() == static_cast<std::size_t>(inputs.cols()), ErrorCode::InvalidInput,
            "reset mask length mismatch");
  }

  Eigen::MatrixXd gates = model.w_x() * inputs;
  gates.colwise() += model.b();
  Eigen::MatrixXd cells(h, inputs.cols());
  Eigen::MatrixXd hidden(h, inputs.cols());

  Eigen::MatrixXd hp = initial.h;
  Eigen::MatrixXd cp = initial.c;
  for (int t = 0; t < steps; ++t) {
    apply_reset(hp, cp, reset, t, batch);
    auto z = gates.middleCols(static_cast<Eigen::Index>(t) * batch, batch);
    z.noalias() += model.w_h() * hp;
    z.topRows(3 * h) = sigmoid(z.topRows(3 * h).array()).matrix();
    z.bottomRows(h) = z.bottomRows(h).array().tanh().matrix();

    auto c = cells.middleCols(static_cast<Eigen::Index>(t) * batch, batch);
    auto hc = hidden.middleCols(static_cast<Eigen::Index>(t) * batch, batch);
    c = z.middleRows(h, h).cwiseProduct(cp) + z.topRows(h).cwiseProduct(z.bottomRows(h));
    hc = z.middleRows(2 * h, h).cwiseProduct(c.array().tanh().matrix());
    hp = hc;
    cp = c;
  }

  ForwardResult result;
  result.outputs = model.w_fc() * hidden;
  result.outputs.colwise() += model.b_fc();
  result.final_state = {std::move(hp), std::move(cp)};

  if (cache != nullptr) {
    cache->filled = true;
    cache->steps = steps;
    cache->batch = batch;
    cache->inputs = inputs;
    cache->gates = std::move(gates);
    cache->cells = std::move(cells);
    cache->hidden = std::move(hidden);
    cache->h0 = initial.h;
    cache->c0 = initial.c;
    if (reset != nullptr) {
      cache->reset = *reset;
    } else {
      cache->reset.clear();
    }
  }
  return result;
}

Eigen::VectorXd backward(const LstmModel& model, const ForwardCache& cache,
                         const Eigen::MatrixXd& output_grad) {
  require(cache.filled, ErrorCode::InvalidState, "backward called without a cached forward pass");
  const int h = model.hidden_dim();
  const int batch = cache.batch;
  const int steps = cache.steps;
  const Eigen::Index cols = static_cast<Eigen::Index>(steps) * batch;
  require(cache.hidden.rows() == h && cache.hidden.cols() == cols, ErrorCode::InvalidState,
          "cache does not match the model");
  require(output_grad.rows() == model.output_dim() && output_grad.cols() == cols,
          ErrorCode::InvalidInput, "output gradient shape mismatch");
  const auto* reset = cache.reset.empty() ? nullptr : &cache.reset;

  const auto& layout = model.layout();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.total);
  Eigen::Map<Eigen::MatrixXd> g_wx(grad.data() + layout.w_x, 4 * h, model.input_dim());
  Eigen::Map<Eigen::MatrixXd> g_wh(grad.data() + layout.w_h, 4 * h, h);
  Eigen::Map<Eigen::VectorXd> g_b(grad.data() + layout.b, 4 * h);
  Eigen::Map<Eigen::MatrixXd> g_wfc(grad.data() + layout.w_fc, model.output_dim(), h);
  Eigen::Map<Eigen::VectorXd> g_bfc(grad.data() + layout.b_fc, model.output_dim());

  g_wfc.noalias() = output_grad * cache.hidden.transpose();
  g_bfc = output_grad.rowwise().sum();
  const Eigen::MatrixXd d_hidden = model.w_fc().transpose() * output_grad;

  Eigen::MatrixXd d_gates(4 * h, cols);
  Eigen::MatrixXd prev_hidden(h, cols);
  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd hp(h, batch);
  Eigen::MatrixXd cp(h, batch);

  for (int t = steps - 1; t >= 0; --t) {
    const Eigen::Index at = static_cast<Eigen::Index>(t) * batch;
    if (t == 0) {
      hp = cache.h0;
      cp = cache.c0;
    } else {
      hp = cache.hidden.middleCols(at - batch, batch);
      cp = cache.cells.middleCols(at - batch, batch);
    }
    apply_reset(hp, cp, reset, t, batch);
    prev_hidden.middleCols(at, batch) = hp;

    const auto z = cache.gates.middleCols(at, batch).array();
    const auto i = z.topRows(h);
    const auto f = z.middleRows(h, h);
    const auto o = z.middleRows(2 * h, h);
    const auto g = z.bottomRows(h);
    const Eigen::ArrayXXd tc = cache.cells.middleCols(at, batch).array().tanh();

    const Eigen::ArrayXXd dh = d_hidden.middleCols(at, batch).array() + dh_next.array();
    const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tc.square());

    auto dz = d_gates.middleCols(at, batch);
    dz.topRows(h) = (dc * g * i * (1.0 - i)).matrix();
    dz.middleRows(h, h) = (dc * cp.array() * f * (1.0 - f)).matrix();
    dz.middleRows(2 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
    dz.bottomRows(h) = (dc * i * (1.0 - g.square())).matrix();

    dc_next = (dc * f).matrix();
    dh_next.noalias() = model.w_h().transpose() * dz;
    if (reset != nullptr) {
      for (int lane = 0; lane < batch; ++lane) {
        if ((*reset)[static_cast<std::size_t>(at) + lane] != 0) {
          dh_next.col(lane).setZero();
          dc_next.col(lane).setZero();
        }
      }
    }
  }

  g_wx.noalias() = d_gates * cache.inputs.transpose();
  g_wh.noalias() = d_gates * prev_hidden.transpose();
  g_b = d_gates.rowwise().sum();
  return grad;
}

}  // namespace a2p::sequence
