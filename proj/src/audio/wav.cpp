#include "a2p/audio.hpp"
#include "a2p/binary_io.hpp"
#include "a2p/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace a2p::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(std::string_view bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof v);
  return v;
}

}  // namespace

AudioSignal read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  const std::string_view data(bytes);
  const auto corrupt = [&](const std::string& what) {
    fail(ErrorCode::CorruptFile, path.string() + ": " + what);
  };

  if (data.size() < 12 || data.substr(0, 4) != "RIFF" || data.substr(8, 4) != "WAVE") {
    corrupt("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::string_view payload;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const auto id = data.substr(pos, 4);
    const auto size = load<std::uint32_t>(data, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min<std::size_t>(size, data.size() - body);
    if (id == "fmt ") {
      if (available < 16) {
        corrupt("short fmt chunk");
      }
      format = load<std::uint16_t>(data, body);
      channels = load<std::uint16_t>(data, body + 2);
      sample_rate = load<std::uint32_t>(data, body + 4);
      bits = load<std::uint16_t>(data, body + 14);
      if (format == kFormatExtensible && available >= 26) {
        format = load<std::uint16_t>(data, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      payload = data.substr(body, available);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt || !have_data) {
    corrupt("missing fmt or data chunk");
  }
  if (channels == 0 || sample_rate == 0) {
    corrupt("invalid channel count or sample rate");
  }

  AudioSignal signal;
  signal.sample_rate = sample_rate;
  signal.channels = channels;

  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = payload.size() / 2 / channels * channels;
    signal.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      signal.samples[i] = load<std::int16_t>(payload, 2 * i) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = payload.size() / 4 / channels * channels;
    signal.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      signal.samples[i] = load<float>(payload, 4 * i);
    }
  } else {
    corrupt("unsupported encoding (need 16-bit PCM or 32-bit float)");
  }
  validate(signal);
  return signal;
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal, WavFormat format) {
  validate(signal);
  const std::uint16_t bits = format == WavFormat::Pcm16 ? 16 : 32;
  const std::uint16_t tag = format == WavFormat::Pcm16 ? kFormatPcm : kFormatFloat;
  const auto channels = static_cast<std::uint16_t>(signal.channels);
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate));
  const std::uint32_t block = channels * bits / 8;
  const auto data_size = static_cast<std::uint32_t>(signal.samples.size() * bits / 8);

  BinaryWriter w;
  w.magic("RIFF");
  w.u32(36 + data_size);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.u32(static_cast<std::uint32_t>(tag) | (static_cast<std::uint32_t>(channels) << 16));
  w.u32(rate);
  w.u32(rate * block);
  w.u32(block | (static_cast<std::uint32_t>(bits) << 16));
  w.magic("data");
  w.u32(data_size);
  std::string body;
  body.resize(data_size);
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    const double s = std::clamp(signal.samples[i], -1.0, 1.0);
    if (format == WavFormat::Pcm16) {
      const auto v = static_cast<std::int16_t>(std::lround(std::clamp(s * 32768.0, -32768.0, 32767.0)));
      std::memcpy(body.data() + 2 * i, &v, 2);
    } else {
      const auto v = static_cast<float>(s);
      std::memcpy(body.data() + 4 * i, &v, 4);
    }
  }
  write_file_bytes(path, w.bytes() + body);
}

}  // namespace a2p::audio
