#include "a2p/audio.hpp"
#include "a2p/error.hpp"

#include <cmath>

namespace a2p::audio {

void validate(const AudioSignal& signal) {
  require(signal.sample_rate > 0.0 && std::isfinite(signal.sample_rate), ErrorCode::InvalidInput,
          "sample rate must be positive");
  require(signal.channels >= 1, ErrorCode::InvalidInput, "channel count must be >= 1");
  require(signal.samples.size() % static_cast<std::size_t>(signal.channels) == 0,
          ErrorCode::InvalidInput, "sample count is not a multiple of the channel count");
  for (double s : signal.samples) {
    require(std::isfinite(s), ErrorCode::InvalidInput, "non-finite sample");
  }
}

AudioSignal mixdown_and_resample(const AudioSignal& signal, double target_rate) {
  validate(signal);
  require(!signal.samples.empty(), ErrorCode::InvalidInput, "empty signal");
  require(target_rate > 0.0, ErrorCode::InvalidInput, "target rate must be positive");

  const std::size_t n = signal.frame_count();
  const auto channels = static_cast<std::size_t>(signal.channels);

  std::vector<double> mono(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      sum += signal.samples[i * channels + c];
    }
    mono[i] = sum / static_cast<double>(channels);
  }

  if (target_rate == signal.sample_rate) {
    return AudioSignal{std::move(mono), target_rate, 1};
  }

  // Keep only output instants that fall inside the input span.
  const double step = signal.sample_rate / target_rate;
  const auto out_len =
      static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) / step + 1e-9)) + 1;
  std::vector<double> out(out_len);
  for (std::size_t j = 0; j < out_len; ++j) {
    const double pos = static_cast<double>(j) * step;
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 >= n - 1) {
      out[j] = mono[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[j] = mono[i0] + frac * (mono[i0 + 1] - mono[i0]);
  }
  return AudioSignal{std::move(out), target_rate, 1};
}

double rms(std::span<const double> samples) {
  if (samples.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (double s : samples) {
    sum += s * s;
  }
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

AudioSignal rms_normalize(const AudioSignal& signal) {
  validate(signal);
  const double level = rms(signal.samples);
  require(level > 0.0, ErrorCode::DegenerateSignal, "signal has zero energy");
  AudioSignal out = signal;
  const double gain = 1.0 / level;
  for (double& s : out.samples) {
    s *= gain;
  }
  return out;
}

}  // namespace a2p::audio
