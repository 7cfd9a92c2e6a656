// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/tfi.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "rfood/error.hpp"

namespace rfood {

namespace {

// fftw's planner is not thread-safe; execution with fftw_execute_dft is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  explicit FftPlan(std::size_t n)
      : n_(n),
        in_(fftw_alloc_complex(n)),
        out_(fftw_alloc_complex(n)) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  fftw_complex* in() { return in_; }
  const fftw_complex* out() const { return out_; }
  void execute() { fftw_execute(plan_); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

std::string_view to_string(Window w) { return w == Window::Hann ? "hann" : "rect"; }

std::string_view to_string(MagnitudeScale s) {
  return s == MagnitudeScale::Linear ? "linear" : "logdb";
}

Window parse_window(std::string_view name) {
  if (name == "hann") return Window::Hann;
  if (name == "rect") return Window::Rect;
  throw ConfigError("unknown window '" + std::string(name) + "'");
}

MagnitudeScale parse_magnitude_scale(std::string_view name) {
  if (name == "linear") return MagnitudeScale::Linear;
  if (name == "logdb") return MagnitudeScale::LogDb;
  throw ConfigError("unknown magnitude scale '" + std::string(name) + "'");
}

void StftConfig::validate() const {
  if (fft_size < 8 || (fft_size & (fft_size - 1)) != 0)
    throw ConfigError("stft: fft_size must be a power of two >= 8");
  if (hop < 1 || hop > fft_size) throw ConfigError("stft: hop must be in [1, fft_size]");
}

std::vector<double> window_coefficients(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann)
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n));
  return w;
}

std::size_t frame_count(std::size_t length, const StftConfig& config) {
  if (length < config.fft_size) return 0;
  return 1 + (length - config.fft_size) / config.hop;
}

Tfi stft(std::span<const Sample> samples, const StftConfig& config) {
  config.validate();
  const std::size_t n = config.fft_size;
  if (samples.size() < n)
    throw Error("stft: record of " + std::to_string(samples.size()) +
                " samples is shorter than fft_size " + std::to_string(n));
  const std::size_t frames = frame_count(samples.size(), config);
  const auto window = window_coefficients(config.window, n);
  const std::size_t half = n / 2;

  Tfi tfi{Matrix(frames, n), config};
  FftPlan plan(n);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * config.hop;
    for (std::size_t i = 0; i < n; ++i) {
      plan.in()[i][0] = window[i] * static_cast<double>(samples[start + i].real());
      plan.in()[i][1] = window[i] * static_cast<double>(samples[start + i].imag());
    }
    plan.execute();
    auto row = tfi.magnitudes.row(t);
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t bin = (c + half) % n;
      double mag = std::hypot(plan.out()[bin][0], plan.out()[bin][1]);
      if (config.scale == MagnitudeScale::LogDb) mag = 20.0 * std::log10(1.0 + mag);
      row[c] = mag;
    }
  }
  return tfi;
}

Tensor3 to_image(const Tfi& tfi) {
  const auto& m = tfi.magnitudes;
  if (m.empty()) throw DimensionError("to_image: empty TFI");
  const auto [lo_it, hi_it] = std::minmax_element(m.data().begin(), m.data().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  Tensor3 image(3, m.rows(), m.cols());
  if (!(range > 0.0)) return image;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double v = (m(i, j) - lo) / range;
      for (std::size_t k = 0; k < 3; ++k) image(k, i, j) = v;
    }
  return image;
}

std::vector<double> temporal_energy(const Tfi& tfi, EnergyAxis axis) {
  const auto& m = tfi.magnitudes;
  if (axis == EnergyAxis::Literal) {
    std::vector<double> energy(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (double v : m.row(i)) energy[i] += v;
    return energy;
  }
  std::vector<double> energy(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) energy[j] += m(i, j);
  return energy;
}

std::size_t max_energy_bin(std::span<const double> energy) {
  if (energy.empty()) throw DimensionError("max_energy_bin: empty energy vector");
  return argmax(energy);
}

double traditional_energy_score(const Tfi& tfi, EnergyAxis axis) {
  const auto& m = tfi.magnitudes;
  if (m.empty()) throw DimensionError("traditional_energy_score: empty TFI");
  const std::size_t k = max_energy_bin(temporal_energy(tfi, axis));
  double sum = 0.0;
  if (axis == EnergyAxis::Literal) {
    for (double v : m.row(k)) sum += v;
    return sum / static_cast<double>(m.cols());
  }
  for (std::size_t i = 0; i < m.rows(); ++i) sum += m(i, k);
  return sum / static_cast<double>(m.rows());
}

Tensor3 quantize_image(const Tensor3& image) {
  Tensor3 out = image;
  for (auto& v : out.data()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return out;
}

}  // namespace rfood
