#include "a2p/audio.hpp"
#include "a2p/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

namespace a2p::audio {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Real-to-complex transform of a fixed size with owned buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t size)
      : size_(size),
        in_(fftw_alloc_real(size), &fftw_free),
        out_(fftw_alloc_complex(size / 2 + 1), &fftw_free) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(size), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }

  /// Power spectrum |X_k|^2 for k in [0, size/2].
  void power(Eigen::VectorXd& out) {
    fftw_execute(plan_);
    const std::size_t bins = size_ / 2 + 1;
    out.resize(static_cast<Eigen::Index>(bins));
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = out_.get()[k][0];
      const double im = out_.get()[k][1];
      out[static_cast<Eigen::Index>(k)] = re * re + im * im;
    }
  }

 private:
  std::size_t size_;
  std::unique_ptr<double, decltype(&fftw_free)> in_;
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out_;
  fftw_plan plan_ = nullptr;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) {
    p <<= 1;
  }
  return p;
}

}  // namespace

FeatureConfig FeatureConfig::for_fps(double fps) {
  FeatureConfig c;
  c.video_fps = fps;
  c.window_ms = 1000.0 / fps;
  return c;
}

void FeatureConfig::validate() const {
  require(video_fps > 0.0, ErrorCode::InvalidInput, "video_fps must be positive");
  require(window_ms > 0.0, ErrorCode::InvalidInput, "window_ms must be positive");
  require(num_mel_filters >= 1, ErrorCode::InvalidInput, "num_mel_filters must be >= 1");
  require(num_ceps >= 1 && num_ceps <= num_mel_filters, ErrorCode::InvalidInput,
          "num_ceps must be in [1, num_mel_filters]");
  require(log_floor > 0.0, ErrorCode::InvalidInput, "log_floor must be positive");
}

std::size_t FeatureConfig::window_samples(double sample_rate) const {
  return static_cast<std::size_t>(std::floor(window_ms * sample_rate / 1000.0 + 1e-9));
}

std::size_t FrameLayout::start(std::size_t i) const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(i) * sample_rate / fps + 1e-9));
}

double FrameLayout::center_time(std::size_t i) const {
  return (static_cast<double>(i) + 0.5) / fps;
}

FrameLayout frame_layout(std::size_t num_samples, double sample_rate, const FeatureConfig& config) {
  config.validate();
  FrameLayout layout;
  layout.sample_rate = sample_rate;
  layout.fps = config.video_fps;
  layout.window_length = config.window_samples(sample_rate);
  require(layout.window_length >= 2, ErrorCode::InvalidInput, "window shorter than two samples");
  require(num_samples >= layout.window_length, ErrorCode::InvalidInput,
          "signal shorter than one analysis window");
  layout.fft_size = next_pow2(layout.window_length);

  auto n = static_cast<std::size_t>(
      std::floor(static_cast<double>(num_samples) * config.video_fps / sample_rate + 1e-9));
  while (n > 0 && layout.start(n - 1) + layout.window_length > num_samples) {
    --n;
  }
  layout.frame_count = n;
  return layout;
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) {
    return w;
  }
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
  }
  return w;
}

double MelFilterbank::hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelFilterbank::mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int num_filters, std::size_t fft_size, double sample_rate) {
  require(num_filters >= 1, ErrorCode::InvalidInput, "need at least one mel filter");
  const auto bins = static_cast<Eigen::Index>(fft_size / 2 + 1);
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  std::vector<double> edges(static_cast<std::size_t>(num_filters) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(num_filters + 1));
  }

  weights_ = Eigen::MatrixXd::Zero(num_filters, bins);
  centers_.resize(static_cast<std::size_t>(num_filters));
  for (int m = 0; m < num_filters; ++m) {
    const double lo = edges[m];
    const double mid = edges[m + 1];
    const double hi = edges[m + 2];
    centers_[m] = mid;
    for (Eigen::Index k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      if (f > lo && f <= mid) {
        weights_(m, k) = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        weights_(m, k) = (hi - f) / (hi - mid);
      }
    }
  }
}

Eigen::VectorXd dct2(const Eigen::VectorXd& input, int count) {
  const auto n = input.size();
  require(count >= 0 && count <= n, ErrorCode::InvalidInput, "DCT count out of range");
  Eigen::VectorXd out(count);
  const double nd = static_cast<double>(n);
  for (int k = 0; k < count; ++k) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      sum += input[i] * std::cos(std::numbers::pi * k * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd));
    }
    out[k] = sum * (k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd));
  }
  return out;
}

Eigen::VectorXd idct2(const Eigen::VectorXd& coeffs) {
  const auto n = coeffs.size();
  const double nd = static_cast<double>(n);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = coeffs[0] * std::sqrt(1.0 / nd);
    for (Eigen::Index k = 1; k < n; ++k) {
      sum += coeffs[k] * std::sqrt(2.0 / nd) *
             std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd));
    }
    out[i] = sum;
  }
  return out;
}

namespace {

struct WindowAnalysis {
  Eigen::MatrixXd log_mel;  // frames x filters
  Eigen::VectorXd log_energy;
  FrameLayout layout;
};

WindowAnalysis analyse_windows(const AudioSignal& signal, const FeatureConfig& config) {
  validate(signal);
  require(signal.channels == 1, ErrorCode::InvalidInput, "MFCC input must be mono");
  const auto& x = signal.samples;
  WindowAnalysis result;
  result.layout = frame_layout(x.size(), signal.sample_rate, config);
  const auto& layout = result.layout;

  const MelFilterbank bank(config.num_mel_filters, layout.fft_size, signal.sample_rate);
  const auto taper = hann_window(layout.window_length);
  RealFft fft(layout.fft_size);
  double* in = fft.input();

  const auto frames = static_cast<Eigen::Index>(layout.frame_count);
  result.log_mel.resize(frames, config.num_mel_filters);
  result.log_energy.resize(frames);
  Eigen::VectorXd power;
  for (Eigen::Index i = 0; i < frames; ++i) {
    const std::size_t start = layout.start(static_cast<std::size_t>(i));
    double energy = 0.0;
    for (std::size_t n = 0; n < layout.window_length; ++n) {
      const double s = x[start + n];
      energy += s * s;
      in[n] = s * taper[n];
    }
    for (std::size_t n = layout.window_length; n < layout.fft_size; ++n) {
      in[n] = 0.0;
    }
    fft.power(power);
    const Eigen::VectorXd mel = bank.weights() * power;
    for (int m = 0; m < config.num_mel_filters; ++m) {
      result.log_mel(i, m) = std::log(mel[m] + config.log_floor);
    }
    result.log_energy[i] =
        std::log(energy / static_cast<double>(layout.window_length) + config.log_floor);
  }
  return result;
}

}  // namespace

Eigen::MatrixXd log_mel_frames(const AudioSignal& signal, const FeatureConfig& config) {
  return analyse_windows(signal, config).log_mel;
}

MfccRows mfcc_frames(const AudioSignal& signal, const FeatureConfig& config) {
  auto analysis = analyse_windows(signal, config);
  const auto frames = analysis.log_mel.rows();
  MfccRows rows;
  rows.ceps.resize(frames, config.num_ceps);
  for (Eigen::Index i = 0; i < frames; ++i) {
    rows.ceps.row(i) = dct2(analysis.log_mel.row(i).transpose(), config.num_ceps).transpose();
  }
  rows.log_energy = std::move(analysis.log_energy);
  rows.timestamps.resize(static_cast<std::size_t>(frames));
  for (std::size_t i = 0; i < rows.timestamps.size(); ++i) {
    rows.timestamps[i] = analysis.layout.center_time(i);
  }
  return rows;
}

Eigen::MatrixXd temporal_derivative(const Eigen::MatrixXd& rows) {
  const auto n = rows.rows();
  require(n >= 2, ErrorCode::InvalidInput, "temporal derivative needs at least two frames");
  Eigen::MatrixXd d(n, rows.cols());
  d.row(0) = rows.row(1) - rows.row(0);
  d.row(n - 1) = rows.row(n - 1) - rows.row(n - 2);
  for (Eigen::Index t = 1; t + 1 < n; ++t) {
    d.row(t) = 0.5 * (rows.row(t + 1) - rows.row(t - 1));
  }
  return d;
}

}  // namespace a2p::audio
