#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace a2p::audio {

/// Sample rate every clip is brought to before feature extraction.
inline constexpr double kCanonicalSampleRate = 44100.0;

/// Interleaved PCM samples in [-1, 1].
struct AudioSignal {
  std::vector<double> samples;
  double sample_rate = kCanonicalSampleRate;
  int channels = 1;

  std::size_t frame_count() const { return channels > 0 ? samples.size() / channels : 0; }
  double duration() const { return static_cast<double>(frame_count()) / sample_rate; }
};

/// Throws InvalidInput unless the signal satisfies its invariants.
void validate(const AudioSignal& signal);

/// Averages channels and linearly resamples to `target_rate`.
AudioSignal mixdown_and_resample(const AudioSignal& signal, double target_rate);

double rms(std::span<const double> samples);

/// Scales the signal so its RMS is 1.0 (0 dB reference).
AudioSignal rms_normalize(const AudioSignal& signal);

struct FeatureConfig {
  double video_fps = 24.0;
  double window_ms = 1000.0 / 24.0;
  int num_mel_filters = 26;
  int num_ceps = 13;
  double log_floor = 1e-10;

  /// Default configuration with the window tied to the frame period.
  static FeatureConfig for_fps(double fps);

  void validate() const;
  std::size_t window_samples(double sample_rate) const;
};

/// Window layout of one signal: window i covers [start(i), start(i) + length).
struct FrameLayout {
  std::size_t window_length = 0;
  std::size_t fft_size = 0;
  std::size_t frame_count = 0;
  double sample_rate = 0.0;
  double fps = 0.0;

  std::size_t start(std::size_t i) const;
  double center_time(std::size_t i) const;
};

FrameLayout frame_layout(std::size_t num_samples, double sample_rate, const FeatureConfig& config);

/// Symmetric Hann taper of the given length.
std::vector<double> hann_window(std::size_t length);

/// Triangular filters on the HTK mel scale spanning 0 Hz to Nyquist.
class MelFilterbank {
 public:
  MelFilterbank(int num_filters, std::size_t fft_size, double sample_rate);

  /// num_filters x (fft_size / 2 + 1)
  const Eigen::MatrixXd& weights() const { return weights_; }
  const std::vector<double>& center_hz() const { return centers_; }
  int size() const { return static_cast<int>(centers_.size()); }

  static double hz_to_mel(double hz);
  static double mel_to_hz(double mel);

 private:
  Eigen::MatrixXd weights_;
  std::vector<double> centers_;
};

/// Orthonormal DCT-II of `input`, first `count` coefficients.
Eigen::VectorXd dct2(const Eigen::VectorXd& input, int count);
/// Inverse of the full orthonormal DCT-II (a DCT-III).
Eigen::VectorXd idct2(const Eigen::VectorXd& coeffs);

struct MfccRows {
  Eigen::MatrixXd ceps;        // frames x num_ceps
  Eigen::VectorXd log_energy;  // frames
  std::vector<double> timestamps;
};

/// Per-window log mel energies: frames x num_mel_filters.
Eigen::MatrixXd log_mel_frames(const AudioSignal& signal, const FeatureConfig& config);

/// Hann -> |FFT|^2 -> mel -> log -> DCT-II per video-rate window.
MfccRows mfcc_frames(const AudioSignal& signal, const FeatureConfig& config);

/// Central differences inside, one-sided at both ends. Rows are frames.
Eigen::MatrixXd temporal_derivative(const Eigen::MatrixXd& rows);

inline constexpr int kFeatureDim = 28;
inline constexpr int kMfccCount = 13;

/// Layout: [13 mfcc | 13 mfcc delta | log energy | log energy delta].
struct AudioFeatureFrame {
  std::array<double, kFeatureDim> values{};
  double timestamp = 0.0;

  std::span<const double, kMfccCount> mfcc() const { return std::span(values).first<kMfccCount>(); }
  std::span<const double, kMfccCount> mfcc_delta() const {
    return std::span(values).subspan<kMfccCount, kMfccCount>();
  }
  double log_energy() const { return values[26]; }
  double energy_delta() const { return values[27]; }
};

struct FeatureSequence {
  double fps = 24.0;
  std::vector<AudioFeatureFrame> frames;

  /// kFeatureDim x frames
  Eigen::MatrixXd matrix() const;
};

std::vector<AudioFeatureFrame> assemble_features(const Eigen::MatrixXd& mfcc_rows,
                                                 const Eigen::MatrixXd& delta_rows,
                                                 const Eigen::VectorXd& energies,
                                                 double fps = 24.0);

/// Full front end: mixdown, resample to 44.1 kHz, RMS normalize, MFCC, deltas.
FeatureSequence extract_features(const AudioSignal& signal, const FeatureConfig& config);

// WAV I/O: 16-bit PCM or 32-bit float, any channel count.
enum class WavFormat { Pcm16, Float32 };
AudioSignal read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioSignal& signal,
               WavFormat format = WavFormat::Pcm16);

// Feature file: "A2PF" | u32 version | u64 frame_count | u32 dim | f64 fps | f64 rows.
inline constexpr std::uint32_t kFeatureFileVersion = 1;
void write_feature_file(const std::filesystem::path& path, const FeatureSequence& features);
FeatureSequence read_feature_file(const std::filesystem::path& path);
void write_feature_csv(const std::filesystem::path& path, const FeatureSequence& features);

}  // namespace a2p::audio
