#include "oracles.hpp"

#include "a2p/lstm.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace a2p::testing {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
  const double u1 = std::max(uniform(rng, 0.0, 1.0), 1e-300);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

keypoints::KeypointFrame visible_frame(const keypoints::PoseVector& pose, std::int64_t index) {
  keypoints::KeypointFrame f;
  f.frame_index = index;
  for (int p = 0; p < keypoints::kNumPoints; ++p) {
    f.points[p] = keypoints::Point2(pose[2 * p], pose[2 * p + 1]);
    f.visible[p] = true;
    f.confidence[p] = 1.0;
  }
  return f;
}

Eigen::MatrixXd mfcc_oracle(const std::vector<double>& x, double sr, double fps, int num_filters,
                            int num_ceps, double log_floor, Eigen::VectorXd* log_energy) {
  const double pi = std::numbers::pi;
  const double window_ms = 1000.0 / fps;
  const int len = static_cast<int>(std::floor(window_ms * sr / 1000.0 + 1e-9));
  int fft = 1;
  while (fft < len) {
    fft *= 2;
  }
  auto start = [&](int i) { return static_cast<int>(std::floor(i * sr / fps + 1e-9)); };
  int frames = static_cast<int>(std::floor(static_cast<double>(x.size()) * fps / sr + 1e-9));
  while (frames > 0 && start(frames - 1) + len > static_cast<int>(x.size())) {
    --frames;
  }

  std::vector<double> hann(len);
  for (int n = 0; n < len; ++n) {
    hann[n] = 0.5 * (1.0 - std::cos(2.0 * pi * n / (len - 1)));
  }

  // Triangular filters between mel-spaced edges.
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const int bins = fft / 2 + 1;
  std::vector<double> edge(num_filters + 2);
  for (int i = 0; i < num_filters + 2; ++i) {
    edge[i] = hz(mel(sr / 2.0) * i / (num_filters + 1));
  }
  std::vector<std::vector<double>> bank(num_filters, std::vector<double>(bins, 0.0));
  for (int m = 0; m < num_filters; ++m) {
    for (int k = 0; k < bins; ++k) {
      const double f = k * sr / fft;
      if (f > edge[m] && f <= edge[m + 1]) {
        bank[m][k] = (f - edge[m]) / (edge[m + 1] - edge[m]);
      } else if (f > edge[m + 1] && f < edge[m + 2]) {
        bank[m][k] = (edge[m + 2] - f) / (edge[m + 2] - edge[m + 1]);
      }
    }
  }

  std::vector<double> cos_table(fft), sin_table(fft);
  for (int i = 0; i < fft; ++i) {
    cos_table[i] = std::cos(2.0 * pi * i / fft);
    sin_table[i] = std::sin(2.0 * pi * i / fft);
  }

  Eigen::MatrixXd out(frames, num_ceps);
  if (log_energy != nullptr) {
    log_energy->resize(frames);
  }
  std::vector<double> w(len), power(bins), logmel(num_filters);
  for (int i = 0; i < frames; ++i) {
    const int s0 = start(i);
    double energy = 0.0;
    for (int n = 0; n < len; ++n) {
      w[n] = x[s0 + n] * hann[n];
      energy += x[s0 + n] * x[s0 + n];
    }
    for (int k = 0; k < bins; ++k) {
      double re = 0.0;
      double im = 0.0;
      for (int n = 0; n < len; ++n) {
        const int idx = static_cast<int>((static_cast<long>(k) * n) % fft);
        re += w[n] * cos_table[idx];
        im -= w[n] * sin_table[idx];
      }
      power[k] = re * re + im * im;
    }
    for (int m = 0; m < num_filters; ++m) {
      double e = 0.0;
      for (int k = 0; k < bins; ++k) {
        e += bank[m][k] * power[k];
      }
      logmel[m] = std::log(e + log_floor);
    }
    for (int c = 0; c < num_ceps; ++c) {
      double sum = 0.0;
      for (int m = 0; m < num_filters; ++m) {
        sum += logmel[m] * std::cos(pi / num_filters * (m + 0.5) * c);
      }
      out(i, c) = sum * std::sqrt((c == 0 ? 1.0 : 2.0) / num_filters);
    }
    if (log_energy != nullptr) {
      (*log_energy)[i] = std::log(energy / len + log_floor);
    }
  }
  return out;
}

Eigen::MatrixXd covariance_oracle(const Eigen::MatrixXd& data) {
  const auto d = data.rows();
  const auto n = data.cols();
  std::vector<double> mean(d, 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      mean[i] += data(i, j);
    }
    mean[i] /= static_cast<double>(n);
  }
  Eigen::MatrixXd c(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        s += (data(a, j) - mean[a]) * (data(b, j) - mean[b]);
      }
      c(a, b) = c(b, a) = s / static_cast<double>(n);
    }
  }
  return c;
}

void jacobi_eigen(const Eigen::MatrixXd& symmetric, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const auto n = symmetric.rows();
  Eigen::MatrixXd a = symmetric;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        off += a(p, q) * a(p, q);
      }
    }
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) {
      break;
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) {
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  values.resize(n);
  vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values[i] = a(order[i], order[i]);
    vectors.col(i) = v.col(order[i]);
  }
}

Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& columns) {
  Eigen::MatrixXd q = columns;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      double dot = 0.0;
      for (Eigen::Index r = 0; r < q.rows(); ++r) {
        dot += q(r, i) * q(r, j);
      }
      for (Eigen::Index r = 0; r < q.rows(); ++r) {
        q(r, j) -= dot * q(r, i);
      }
    }
    double norm = 0.0;
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      norm += q(r, j) * q(r, j);
    }
    norm = std::sqrt(norm);
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      q(r, j) /= norm;
    }
  }
  return q;
}

double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
  const double smallest = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smallest, -1.0, 1.0));
}

GradientCheck check_lstm_gradient(std::mt19937_64& rng, int input_dim, int hidden_dim, int output_dim,
                                  int delay, int steps, int batch, double eps) {
  using namespace a2p::sequence;
  LstmModel model(input_dim, hidden_dim, output_dim, delay);
  for (Eigen::Index i = 0; i < model.parameters().size(); ++i) {
    model.parameters()[i] = uniform(rng, -0.8, 0.8);
  }
  const int cols = steps * batch;
  Eigen::MatrixXd inputs(input_dim, cols);
  Eigen::MatrixXd targets(output_dim, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < input_dim; ++r) {
      inputs(r, c) = gaussian(rng);
    }
    for (int r = 0; r < output_dim; ++r) {
      targets(r, c) = gaussian(rng);
    }
  }
  LstmState init = LstmState::zeros(hidden_dim, batch);
  for (Eigen::Index i = 0; i < init.h.size(); ++i) {
    init.h.data()[i] = uniform(rng, -0.5, 0.5);
    init.c.data()[i] = uniform(rng, -0.5, 0.5);
  }
  // Column t * batch + lane pairs with target column (t - delay) * batch + lane.
  auto window_loss = [&](const LstmModel& m, ForwardCache* cache, Eigen::MatrixXd* grad) {
    const auto out = forward(m, inputs, batch, init, cache).outputs;
    Eigen::MatrixXd shifted = Eigen::MatrixXd::Zero(output_dim, cols);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(cols), 0);
    for (int t = delay; t < steps; ++t) {
      for (int l = 0; l < batch; ++l) {
        shifted.col(t * batch + l) = targets.col((t - delay) * batch + l);
        mask[static_cast<std::size_t>(t * batch + l)] = 1;
      }
    }
    const auto ml = masked_mse(out, shifted, mask);
    if (grad != nullptr) {
      *grad = ml.gradient;
    }
    return ml.value;
  };

  ForwardCache cache;
  Eigen::MatrixXd out_grad;
  window_loss(model, &cache, &out_grad);
  const Eigen::VectorXd analytic = backward(model, cache, out_grad);

  GradientCheck result;
  result.parameters = static_cast<int>(model.parameters().size());
  for (Eigen::Index i = 0; i < model.parameters().size(); ++i) {
    LstmModel plus = model;
    LstmModel minus = model;
    plus.parameters()[i] += eps;
    minus.parameters()[i] -= eps;
    const double numeric = (window_loss(plus, nullptr, nullptr) - window_loss(minus, nullptr, nullptr)) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic[i] - numeric) / denom);
  }
  return result;
}

}  // namespace a2p::testing
