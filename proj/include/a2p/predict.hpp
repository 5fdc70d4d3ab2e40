#pragma once

#include "a2p/audio.hpp"
#include "a2p/keypoints.hpp"
#include "a2p/lstm.hpp"
#include "a2p/motion.hpp"
#include "a2p/train.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace a2p::sequence {

/// Trained network plus everything needed to turn its outputs into keypoints.
struct NetworkBundle {
  LstmModel network;
  std::optional<keypoints::MotionModel> motion;
  int upsample_factor = 4;
  audio::FeatureConfig features;
  TrainConfig config;

  double video_fps() const { return features.video_fps; }
  double tick_rate() const { return features.video_fps * upsample_factor; }
};

/// Linear interpolation of dim x n video-rate features onto n * factor ticks;
/// the trailing factor - 1 ticks hold the last frame.
Eigen::MatrixXd upsample_features(const Eigen::MatrixXd& features, int factor);

/// Destandardized PCA coefficients, one column per tick (n * factor columns).
/// Output tick t is read from network step t + delay; the input is padded with
/// its last column so every tick gets a prediction.
Eigen::MatrixXd predict_coefficients(const NetworkBundle& bundle, const Eigen::MatrixXd& features);

/// Audio features -> keypoints at the tick rate, in the motion model's reference frame.
keypoints::KeypointClip predict(const NetworkBundle& bundle, const audio::FeatureSequence& features);

/// Mean Euclidean distance over frames and ground-truth-visible points.
double pixel_error(const std::vector<keypoints::KeypointFrame>& predicted,
                   const std::vector<keypoints::KeypointFrame>& truth);

// Network file: "A2PN" | u32 version | u32 crc32(body) | body.
inline constexpr std::uint32_t kNetworkFileVersion = 1;
void write_network(const std::filesystem::path& path, const NetworkBundle& bundle);
NetworkBundle read_network(const std::filesystem::path& path);

/// JSON metadata sidecar: dimensions and the full training configuration.
std::string network_sidecar_json(const NetworkBundle& bundle, const TrainReport* report = nullptr);
/// One NDJSON training-log record.
std::string train_log_line(const EpochRecord& record);

}  // namespace a2p::sequence
