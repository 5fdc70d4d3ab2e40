#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace a2p::testing {

using namespace keypoints;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
  const double u1 = std::max(uniform(rng, 0.0, 1.0), 1e-300);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void set(PoseVector& v, int p, double x, double y) {
  v[2 * p] = x;
  v[2 * p + 1] = y;
}

// Hand: wrist at the origin, five fingers fanning around `heading` (radians).
void place_hand(PoseVector& pose, int offset, double wx, double wy, double heading, double mirror) {
  set(pose, offset, wx, wy);
  const double spread[5] = {-0.9, -0.35, 0.0, 0.3, 0.6};
  const double base[5] = {3.0, 6.0, 6.5, 6.0, 5.0};
  for (int f = 0; f < 5; ++f) {
    const double a = heading + mirror * spread[f];
    for (int j = 1; j <= 4; ++j) {
      const double r = base[f] + 2.5 * j;
      set(pose, offset + 4 * f + j, wx + r * std::cos(a), wy + r * std::sin(a));
    }
  }
}

// Feature normalization constants of the planted map (typical values of the violin audio).
constexpr int kDrivers[4] = {1, 2, 3, 26};
constexpr double kDriverMean[4] = {14.77, -11.46, -5.81, -1.49};
constexpr double kDriverStd[4] = {12.58, 11.40, 3.83, 3.80};
constexpr double kModeAmplitude[kSyntheticModes] = {12.0, 10.0, 8.0};
constexpr double kWeights[kSyntheticModes][4] = {
    {0.9, -0.4, 0.2, 0.5},
    {-0.3, 0.8, 0.5, 0.2},
    {0.4, 0.3, -0.7, 0.6},
};

}  // namespace

PoseVector base_skeleton() {
  PoseVector p;
  set(p, kRightShoulder, 130, 90);
  set(p, kRightElbow, 108, 138);
  set(p, kRightWrist, 140, 168);
  set(p, kLeftShoulder, 190, 90);
  set(p, kLeftElbow, 222, 122);
  set(p, kLeftWrist, 204, 82);
  set(p, kRightHip, 142, 200);
  set(p, kLeftHip, 178, 200);
  place_hand(p, kLeftHandOffset, 204, 82, -1.9, 1.0);
  place_hand(p, kRightHandOffset, 140, 168, 0.2, -1.0);
  return p;
}

Eigen::MatrixXd mode_shapes() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(kPoseDim, kSyntheticModes);
  // Bowing: right forearm and hand slide together.
  m(2 * kRightElbow, 0) = 0.5;
  m(2 * kRightElbow + 1, 0) = 0.1;
  m(2 * kRightWrist, 0) = 1.0;
  m(2 * kRightWrist + 1, 0) = 0.3;
  for (int i = 0; i < kHandPoints; ++i) {
    m(2 * (kRightHandOffset + i), 0) = 1.0;
    m(2 * (kRightHandOffset + i) + 1, 0) = 0.3;
  }
  // Fingering: left fingers curl, more toward the tips.
  for (int f = 0; f < 5; ++f) {
    for (int j = 1; j <= 4; ++j) {
      const int p = kLeftHandOffset + 4 * f + j;
      m(2 * p, 1) = 0.15 * j;
      m(2 * p + 1, 1) = 0.25 * j;
    }
  }
  // Left arm lifts.
  m(2 * kLeftElbow + 1, 2) = 0.6;
  m(2 * kLeftWrist + 1, 2) = 1.0;
  m(2 * kLeftHandOffset + 1, 2) = 1.0;
  return m;
}

audio::AudioSignal violin_audio(double seconds, int sample_rate, std::mt19937_64& rng) {
  audio::AudioSignal s;
  s.sample_rate = sample_rate;
  s.channels = 1;
  const auto total = static_cast<std::size_t>(seconds * sample_rate);
  s.samples.assign(total, 0.0);
  const double dt = 1.0 / sample_rate;
  std::size_t pos = 0;
  while (pos < total) {
    const double dur = uniform(rng, 0.2, 0.8);
    const auto len = std::min(total - pos, static_cast<std::size_t>(dur * sample_rate));
    const bool rest = uniform(rng, 0.0, 1.0) < 0.1;
    const double midi = std::floor(uniform(rng, 55.0, 85.0));
    const double f0 = 440.0 * std::pow(2.0, (midi - 69.0) / 12.0);
    const double loud = uniform(rng, 0.15, 1.0);
    const double tilt = uniform(rng, 0.7, 1.8);
    const double vib_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const int harmonics = std::min(12, static_cast<int>(0.5 * sample_rate / f0));
    double phase = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
      const double t = static_cast<double>(n) * dt;
      double value = 1e-4 * gaussian(rng);
      if (!rest) {
        const double env = std::min({1.0, t / 0.03, (static_cast<double>(len - n) * dt) / 0.05});
        const double f = f0 * (1.0 + 0.003 * std::sin(2.0 * std::numbers::pi * 5.5 * t + vib_phase));
        phase += 2.0 * std::numbers::pi * f * dt;
        // sin(k*phase) by the Chebyshev recurrence.
        const double c2 = 2.0 * std::cos(phase);
        double prev = 0.0;
        double cur = std::sin(phase);
        double sum = 0.0;
        for (int k = 1; k <= harmonics; ++k) {
          sum += cur / std::pow(static_cast<double>(k), tilt);
          const double next = c2 * cur - prev;
          prev = cur;
          cur = next;
        }
        value += 0.25 * loud * env * sum;
      }
      s.samples[pos + n] = value;
    }
    pos += len;
  }
  double peak = 0.0;
  for (double v : s.samples) {
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    for (double& v : s.samples) {
      v *= 0.9 / peak;
    }
  }
  return s;
}

audio::AudioSignal noise_audio(double seconds, int sample_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  audio::AudioSignal s;
  s.sample_rate = sample_rate;
  s.channels = 1;
  s.samples.resize(static_cast<std::size_t>(seconds * sample_rate));
  for (double& v : s.samples) {
    v = uniform(rng, -0.5, 0.5);
  }
  return s;
}

Eigen::MatrixXd motion_coefficients(const audio::FeatureSequence& features) {
  const auto n = static_cast<Eigen::Index>(features.frames.size());
  Eigen::MatrixXd c(kSyntheticModes, n);
  double smooth[4] = {0, 0, 0, 0};
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& f = features.frames[static_cast<std::size_t>(t)].values;
    for (int d = 0; d < 4; ++d) {
      const double z = (f[kDrivers[d]] - kDriverMean[d]) / kDriverStd[d];
      smooth[d] = t == 0 ? z : 0.6 * smooth[d] + 0.4 * z;
    }
    for (int j = 0; j < kSyntheticModes; ++j) {
      double a = 0.0;
      for (int d = 0; d < 4; ++d) {
        a += kWeights[j][d] * smooth[d];
      }
      c(j, t) = kModeAmplitude[j] * std::tanh(a);
    }
  }
  return c;
}

SyntheticClip make_clip(const std::string& id, const SyntheticOptions& o, std::mt19937_64& rng) {
  SyntheticClip clip;
  clip.id = id;
  clip.audio = violin_audio(o.clip_seconds, o.sample_rate, rng);
  const auto features = audio::extract_features(clip.audio, audio::FeatureConfig::for_fps(o.fps));
  const Eigen::MatrixXd coeffs = motion_coefficients(features);
  const Eigen::MatrixXd shapes = mode_shapes();
  const PoseVector base = base_skeleton();
  const Eigen::Vector2d center(160.0, 140.0);

  double phase[4];
  for (double& p : phase) {
    p = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
  const auto n = coeffs.cols();
  clip.keypoints.fps = o.fps;
  clip.keypoints.width = o.width;
  clip.keypoints.height = o.height;
  clip.corrupted.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double sec = static_cast<double>(t) / o.fps;
    const Eigen::VectorXd pose = base + shapes * coeffs.col(t);
    const double tx = o.drift * 6.0 * std::sin(2.0 * std::numbers::pi * sec / 37.0 + phase[0]);
    const double ty = o.drift * 4.0 * std::sin(2.0 * std::numbers::pi * sec / 53.0 + phase[1]);
    const double scale = 1.0 + o.drift * 0.04 * std::sin(2.0 * std::numbers::pi * sec / 61.0 + phase[2]);
    const double rot = o.drift * 0.03 * std::sin(2.0 * std::numbers::pi * sec / 71.0 + phase[3]);
    const Eigen::Matrix2d r = Eigen::Rotation2D<double>(rot).toRotationMatrix();

    KeypointFrame f;
    f.frame_index = t;
    f.person_id = "p0";
    for (int p = 0; p < kNumPoints; ++p) {
      const Eigen::Vector2d q(pose[2 * p], pose[2 * p + 1]);
      Eigen::Vector2d moved = scale * (r * (q - center)) + center + Eigen::Vector2d(tx, ty);
      moved += o.noise_px * Eigen::Vector2d(gaussian(rng), gaussian(rng));
      f.points[p] = moved;
      f.confidence[p] = 0.9;
      f.visible[p] = true;
    }

    const double u = uniform(rng, 0.0, 1.0);
    if (u < o.jump_fraction) {
      // A misdetected limb: right arm and hand, or the left hand.
      if (uniform(rng, 0.0, 1.0) < 0.5) {
        for (int p : {int(kRightElbow), int(kRightWrist)}) {
          f.points[p].x() += 50.0;
        }
        for (int i = 0; i < kHandPoints; ++i) {
          f.points[kRightHandOffset + i].x() += 50.0;
        }
      } else {
        for (int i = 0; i < kHandPoints; ++i) {
          f.points[kLeftHandOffset + i].y() += 50.0;
        }
      }
      clip.corrupted[static_cast<std::size_t>(t)] = 1;
    } else if (u < o.jump_fraction + o.missing_fraction) {
      const int p = static_cast<int>(uniform(rng, 0.0, kNumPoints));
      f.points[p] = Point2::Zero();
      f.confidence[p] = 0.0;
      f.visible[p] = false;
      clip.corrupted[static_cast<std::size_t>(t)] = 1;
    }
    clip.keypoints.frames.push_back(std::move(f));
  }
  return clip;
}

std::vector<std::string> write_corpus(const std::filesystem::path& root, const SyntheticOptions& options) {
  std::filesystem::create_directories(root / "audio");
  std::filesystem::create_directories(root / "keypoints");
  std::mt19937_64 rng(options.seed);
  std::vector<std::string> ids;
  for (int c = 0; c < options.clips; ++c) {
    char id[32];
    std::snprintf(id, sizeof id, "clip%02d", c);
    const auto clip = make_clip(id, options, rng);
    audio::write_wav(root / "audio" / (clip.id + ".wav"), clip.audio);
    keypoints::write_keypoint_json(root / "keypoints" / (clip.id + ".json"), clip.keypoints);
    ids.push_back(clip.id);
  }
  return ids;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("a2p_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace a2p::testing
