#pragma once

#include "a2p/audio.hpp"
#include "a2p/keypoints.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace a2p::testing {

/// Corpus where the non-rigid pose is a fixed smooth function of the audio features.
struct SyntheticOptions {
  int clips = 8;
  double clip_seconds = 150.0;
  double fps = 24.0;
  int sample_rate = 44100;
  int width = 320;
  int height = 240;
  double noise_px = 0.1;
  /// Scales the slow rigid drift of the whole skeleton.
  double drift = 1.0;
  /// Fraction of frames where a limb jumps by +50 px.
  double jump_fraction = 0.0;
  /// Fraction of frames with one point missing.
  double missing_fraction = 0.0;
  std::uint64_t seed = 7;
};

inline constexpr int kSyntheticModes = 3;

struct SyntheticClip {
  std::string id;
  audio::AudioSignal audio;
  keypoints::KeypointClip keypoints;
  /// Frames carrying an injected outlier.
  std::vector<std::uint8_t> corrupted;
};

keypoints::PoseVector base_skeleton();
/// kPoseDim x kSyntheticModes displacement patterns (pixels per unit coefficient).
Eigen::MatrixXd mode_shapes();

/// Harmonic notes with varying pitch, timbre and loudness.
audio::AudioSignal violin_audio(double seconds, int sample_rate, std::mt19937_64& rng);
/// Uniform white noise.
audio::AudioSignal noise_audio(double seconds, int sample_rate, std::uint64_t seed);

/// The planted map: kSyntheticModes x frames coefficients from the audio features.
Eigen::MatrixXd motion_coefficients(const audio::FeatureSequence& features);

SyntheticClip make_clip(const std::string& id, const SyntheticOptions& options, std::mt19937_64& rng);

/// Generates clips one at a time into <root>/audio/<id>.wav and <root>/keypoints/<id>.json.
std::vector<std::string> write_corpus(const std::filesystem::path& root, const SyntheticOptions& options);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace a2p::testing
