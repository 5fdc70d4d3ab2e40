#include "a2p/binary_io.hpp"
#include "a2p/error.hpp"
#include "a2p/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace a2p::sequence {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Time-major batch: column t * lanes + lane.
struct LaneBatch {
  int lanes = 0;
  int length = 0;
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;  // already shifted by the delay
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> reset;

  Eigen::Index column(int t, int lane) const { return static_cast<Eigen::Index>(t) * lanes + lane; }
};

LaneBatch allocate(int lanes, int length, Eigen::Index in_dim, Eigen::Index out_dim) {
  LaneBatch b;
  b.lanes = lanes;
  b.length = length;
  const Eigen::Index cols = static_cast<Eigen::Index>(lanes) * length;
  b.inputs = Eigen::MatrixXd::Zero(in_dim, cols);
  b.targets = Eigen::MatrixXd::Zero(out_dim, cols);
  b.mask.assign(static_cast<std::size_t>(cols), 0);
  b.reset.assign(static_cast<std::size_t>(cols), 1);
  return b;
}

void place(LaneBatch& b, int t, int lane, const Sequence& seq, Eigen::Index tick, int delay) {
  const auto col = b.column(t, lane);
  b.inputs.col(col) = seq.inputs.col(tick);
  b.reset[static_cast<std::size_t>(col)] = (t == 0 || tick == 0) ? 1 : 0;
  const Eigen::Index source = tick - delay;
  if (source >= 0 && seq.valid[static_cast<std::size_t>(source)] != 0) {
    b.targets.col(col) = seq.targets.col(source);
    b.mask[static_cast<std::size_t>(col)] = 1;
  }
}

/// Concatenates sequences in `order` into one stream and cuts it into `wanted` equal lanes.
LaneBatch pack_stream(const std::vector<Sequence>& seqs, const std::vector<std::size_t>& order,
                      int wanted, int delay) {
  std::vector<std::pair<std::size_t, Eigen::Index>> stream;
  for (std::size_t s : order) {
    for (Eigen::Index t = 0; t < seqs[s].length(); ++t) {
      stream.emplace_back(s, t);
    }
  }
  const auto total = static_cast<long>(stream.size());
  const int lanes = static_cast<int>(std::min<long>(wanted, total));
  const int length = static_cast<int>((total + lanes - 1) / lanes);
  LaneBatch b = allocate(lanes, length, seqs.front().inputs.rows(), seqs.front().targets.rows());
  for (int lane = 0; lane < lanes; ++lane) {
    for (int t = 0; t < length; ++t) {
      const long s = static_cast<long>(lane) * length + t;
      if (s >= total) {
        break;
      }
      const auto [seq, tick] = stream[static_cast<std::size_t>(s)];
      place(b, t, lane, seqs[seq], tick, delay);
    }
  }
  return b;
}

/// One sequence per lane, padded to the longest.
LaneBatch pack_per_lane(const std::vector<Sequence>& seqs, int delay) {
  Eigen::Index longest = 0;
  for (const auto& s : seqs) {
    longest = std::max(longest, s.length());
  }
  LaneBatch b = allocate(static_cast<int>(seqs.size()), static_cast<int>(longest),
                         seqs.front().inputs.rows(), seqs.front().targets.rows());
  for (int lane = 0; lane < b.lanes; ++lane) {
    const auto& seq = seqs[static_cast<std::size_t>(lane)];
    for (Eigen::Index t = 0; t < seq.length(); ++t) {
      place(b, static_cast<int>(t), lane, seq, t, delay);
    }
  }
  return b;
}

void check_sequences(const std::vector<Sequence>& seqs, const LstmModel& model) {
  for (const auto& s : seqs) {
    require(s.inputs.rows() == model.input_dim() && s.targets.rows() == model.output_dim(),
            ErrorCode::InvalidInput, "sequence '" + s.id + "' does not match the model dimensions");
    require(s.targets.cols() == s.length() && s.valid.size() == static_cast<std::size_t>(s.length()),
            ErrorCode::InvalidInput, "sequence '" + s.id + "' has inconsistent lengths");
    require(s.length() > 0, ErrorCode::InvalidInput, "sequence '" + s.id + "' is empty");
  }
}

}  // namespace

void TrainConfig::validate() const {
  require(hidden_dim >= 1, ErrorCode::InvalidInput, "hidden_dim must be >= 1");
  require(batch_size >= 1, ErrorCode::InvalidInput, "batch_size must be >= 1");
  require(time_delay >= 0, ErrorCode::InvalidInput, "time_delay must be >= 0");
  require(bptt_steps >= time_delay + 1, ErrorCode::InvalidInput, "bptt_steps must exceed time_delay");
  require(learning_rate >= 0.0, ErrorCode::InvalidInput, "learning_rate must be >= 0");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorCode::InvalidInput,
          "dropout_rate must be in [0, 1)");
  require(epochs >= 0, ErrorCode::InvalidInput, "epochs must be >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0,
          ErrorCode::InvalidInput, "invalid Adam hyper-parameters");
  require(clip_norm > 0.0, ErrorCode::InvalidInput, "clip_norm must be positive");
}

std::uint32_t parameter_checksum(const LstmModel& model) {
  const auto& p = model.parameters();
  return crc32_of({reinterpret_cast<const char*>(p.data()), static_cast<std::size_t>(p.size()) * sizeof(double)});
}

SequenceEvaluation evaluate_sequences(const LstmModel& model, const std::vector<Sequence>& sequences,
                                      const keypoints::MotionModel* motion) {
  SequenceEvaluation result;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (sequences.empty()) {
    result.loss = nan;
    result.pixel_error = nan;
    return result;
  }
  check_sequences(sequences, model);
  if (motion != nullptr) {
    require(motion->pca.modes() == model.output_dim() &&
                motion->output_stats.dim() == model.output_dim(),
            ErrorCode::InvalidInput, "motion model does not match the network output");
  }

  const LaneBatch batch = pack_per_lane(sequences, model.time_delay());
  constexpr int kWindow = 512;
  LstmState state = LstmState::zeros(model.hidden_dim(), batch.lanes);
  double squared = 0.0;
  double pixels = 0.0;
  for (int start = 0; start < batch.length; start += kWindow) {
    const int steps = std::min(kWindow, batch.length - start);
    const Eigen::Index c0 = batch.column(start, 0);
    const Eigen::Index n = static_cast<Eigen::Index>(steps) * batch.lanes;
    const std::vector<std::uint8_t> reset(batch.reset.begin() + c0, batch.reset.begin() + c0 + n);
    auto out = forward(model, batch.inputs.middleCols(c0, n), batch.lanes, state, nullptr, &reset);
    state = std::move(out.final_state);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (batch.mask[static_cast<std::size_t>(c0 + j)] == 0) {
        continue;
      }
      const Eigen::VectorXd d = out.outputs.col(j) - batch.targets.col(c0 + j);
      squared += d.squaredNorm();
      ++result.pairs;
      if (motion != nullptr) {
        const Eigen::VectorXd pose_diff =
            motion->pca.components * d.cwiseProduct(motion->output_stats.std);
        double sum = 0.0;
        for (int p = 0; p < keypoints::kNumPoints; ++p) {
          sum += pose_diff.segment<2>(2 * p).norm();
        }
        pixels += sum / keypoints::kNumPoints;
      }
    }
  }
  if (result.pairs == 0) {
    result.loss = nan;
    result.pixel_error = nan;
    return result;
  }
  result.loss = squared / static_cast<double>(result.pairs * static_cast<std::size_t>(model.output_dim()));
  result.pixel_error = motion != nullptr ? pixels / static_cast<double>(result.pairs) : nan;
  return result;
}

TrainResult train(const TrainingData& data, const LstmModel& initial, const TrainConfig& config) {
  config.validate();
  require(!data.train.empty(), ErrorCode::InvalidInput, "empty training set");
  LstmModel model = initial;
  model.set_time_delay(config.time_delay);
  check_sequences(data.train, model);
  check_sequences(data.valid, model);
  const keypoints::MotionModel* motion = data.motion ? &*data.motion : nullptr;

  TrainReport report;
  report.clip_norm = config.clip_norm;
  report.time_delay = config.time_delay;
  report.delay_source = config.delay_source;

  std::mt19937_64 rng(config.seed);
  AdamMoments moments = AdamMoments::zeros(model.parameters().size());
  const AdamConfig adam = config.adam();
  long step = 0;
  Eigen::VectorXd best = model.parameters();
  double best_loss = std::numeric_limits<double>::infinity();
  const int delay = config.time_delay;
  const double keep_scale = 1.0 / (1.0 - config.dropout_rate);

  std::vector<std::size_t> order(data.train.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    const LaneBatch batch = pack_stream(data.train, order, config.batch_size, delay);

    LstmState state = LstmState::zeros(model.hidden_dim(), batch.lanes);
    ForwardCache cache;
    double loss_sum = 0.0;
    std::size_t pair_sum = 0;
    for (int start = 0; start < batch.length; start += config.bptt_steps) {
      const int steps = std::min(config.bptt_steps, batch.length - start);
      const Eigen::Index c0 = batch.column(start, 0);
      const Eigen::Index n = static_cast<Eigen::Index>(steps) * batch.lanes;

      Eigen::MatrixXd x = batch.inputs.middleCols(c0, n);
      if (config.dropout_rate > 0.0) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
          for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, j) *= uniform01(rng) < config.dropout_rate ? 0.0 : keep_scale;
          }
        }
      }
      const std::vector<std::uint8_t> reset(batch.reset.begin() + c0, batch.reset.begin() + c0 + n);
      const std::vector<std::uint8_t> mask(batch.mask.begin() + c0, batch.mask.begin() + c0 + n);

      auto out = forward(model, x, batch.lanes, state, &cache, &reset);
      state = std::move(out.final_state);
      const MaskedLoss window = masked_mse(out.outputs, batch.targets.middleCols(c0, n), mask);
      if (window.pairs == 0) {
        continue;
      }
      Eigen::VectorXd grad = backward(model, cache, window.gradient);
      const double norm = grad.norm();
      if (std::isfinite(norm) && norm > config.clip_norm) {
        grad *= config.clip_norm / norm;
      }
      try {
        adam_step(model.parameters(), grad, moments, ++step, adam);
      } catch (const Error& e) {
        throw TrainingAborted(std::string(e.what()) + " at epoch " + std::to_string(epoch), report);
      }
      loss_sum += window.value * static_cast<double>(window.pairs);
      pair_sum += window.pairs;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = pair_sum > 0 ? loss_sum / static_cast<double>(pair_sum)
                                  : std::numeric_limits<double>::quiet_NaN();
    const auto eval = evaluate_sequences(model, data.valid, motion);
    rec.valid_loss = eval.loss;
    rec.pixel_error = eval.pixel_error;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(rec);

    const double selection = data.valid.empty() ? rec.train_loss : rec.valid_loss;
    if (selection < best_loss) {
      best_loss = selection;
      best = model.parameters();
      report.best_epoch = epoch;
    }
  }

  if (report.best_epoch > 0) {
    model.parameters() = best;
  }
  report.final_train_pixel_error = evaluate_sequences(model, data.train, motion).pixel_error;
  report.final_valid_pixel_error = evaluate_sequences(model, data.valid, motion).pixel_error;
  report.parameter_checksum = parameter_checksum(model);
  return {std::move(model), std::move(report)};
}

}  // namespace a2p::sequence
