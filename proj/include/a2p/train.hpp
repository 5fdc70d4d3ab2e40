#pragma once

#include "a2p/error.hpp"
#include "a2p/lstm.hpp"
#include "a2p/motion.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace a2p::sequence {

struct TrainConfig {
  int hidden_dim = 200;
  int bptt_steps = 400;
  int batch_size = 100;
  double learning_rate = 5e-3;
  double dropout_rate = 0.4;
  int epochs = 300;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
  /// In ticks of the network rate.
  int time_delay = 5;
  /// Records how time_delay was obtained ("steps" or "<ms> ms").
  std::string delay_source = "steps";
  double clip_norm = 5.0;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

/// One contiguous stretch of network ticks. Target column t is the pose at tick t.
struct Sequence {
  std::string id;
  Eigen::MatrixXd inputs;   // input_dim x T, standardized
  Eigen::MatrixXd targets;  // output_dim x T, standardized
  std::vector<std::uint8_t> valid;

  Eigen::Index length() const { return inputs.cols(); }
};

struct TrainingData {
  std::vector<Sequence> train;
  std::vector<Sequence> valid;
  /// Needed for pixel errors; optional.
  std::optional<keypoints::MotionModel> motion;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double pixel_error = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double final_train_pixel_error = 0.0;
  double final_valid_pixel_error = 0.0;
  std::uint32_t parameter_checksum = 0;
  double clip_norm = 0.0;
  int time_delay = 0;
  std::string delay_source;
};

struct TrainResult {
  LstmModel model;
  TrainReport report;
};

struct SequenceEvaluation {
  double loss = 0.0;
  double pixel_error = 0.0;  // NaN without a motion model
  std::size_t pairs = 0;
};

/// Raised when a non-finite gradient stops training; carries the epochs completed so far.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, TrainReport report)
      : Error(ErrorCode::NonFiniteGradient, what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

/// Inference-mode loss and pixel error over whole sequences (zero initial state).
SequenceEvaluation evaluate_sequences(const LstmModel& model, const std::vector<Sequence>& sequences,
                                      const keypoints::MotionModel* motion);

/// Truncated-BPTT training with Adam; returns the parameters with the best
/// validation loss (training loss when there is no validation set).
TrainResult train(const TrainingData& data, const LstmModel& initial, const TrainConfig& config);

std::uint32_t parameter_checksum(const LstmModel& model);

}  // namespace a2p::sequence
