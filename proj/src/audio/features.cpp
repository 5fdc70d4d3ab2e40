#include "a2p/audio.hpp"
#include "a2p/error.hpp"

#include <string>

namespace a2p::audio {

Eigen::MatrixXd FeatureSequence::matrix() const {
  Eigen::MatrixXd m(kFeatureDim, static_cast<Eigen::Index>(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(frames[i].values.data(), kFeatureDim);
  }
  return m;
}

std::vector<AudioFeatureFrame> assemble_features(const Eigen::MatrixXd& mfcc_rows,
                                                 const Eigen::MatrixXd& delta_rows,
                                                 const Eigen::VectorXd& energies, double fps) {
  const auto n = mfcc_rows.rows();
  require(delta_rows.rows() == n && energies.size() == n, ErrorCode::InvalidInput,
          "feature row counts differ: mfcc " + std::to_string(n) + ", delta " +
              std::to_string(delta_rows.rows()) + ", energy " + std::to_string(energies.size()));
  std::vector<AudioFeatureFrame> frames;
  if (n == 0) {
    return frames;
  }
  require(mfcc_rows.cols() == kMfccCount && delta_rows.cols() == kMfccCount,
          ErrorCode::InvalidInput, "expected 13 cepstral coefficients per row");
  require(fps > 0.0, ErrorCode::InvalidInput, "fps must be positive");

  Eigen::VectorXd energy_delta = Eigen::VectorXd::Zero(n);
  if (n >= 2) {
    energy_delta = temporal_derivative(energies);
  }

  frames.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& f = frames[static_cast<std::size_t>(i)];
    for (int c = 0; c < kMfccCount; ++c) {
      f.values[c] = mfcc_rows(i, c);
      f.values[kMfccCount + c] = delta_rows(i, c);
    }
    f.values[26] = energies[i];
    f.values[27] = energy_delta[i];
    f.timestamp = (static_cast<double>(i) + 0.5) / fps;
  }
  return frames;
}

FeatureSequence extract_features(const AudioSignal& signal, const FeatureConfig& config) {
  require(config.num_ceps == kMfccCount, ErrorCode::InvalidInput,
          "the 28-D layout needs num_ceps = 13");
  const AudioSignal mono = rms_normalize(mixdown_and_resample(signal, kCanonicalSampleRate));
  const MfccRows rows = mfcc_frames(mono, config);
  require(rows.ceps.rows() >= 2, ErrorCode::InvalidInput, "audio yields fewer than two frames");
  const Eigen::MatrixXd deltas = temporal_derivative(rows.ceps);
  FeatureSequence seq;
  seq.fps = config.video_fps;
  seq.frames = assemble_features(rows.ceps, deltas, rows.log_energy, config.video_fps);
  return seq;
}

}  // namespace a2p::audio
