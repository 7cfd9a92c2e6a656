// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "rfood/synth.hpp"
#include "rfood/tensor.hpp"

namespace rfood {

enum class Window { Hann, Rect };
enum class MagnitudeScale { Linear, LogDb };

std::string_view to_string(Window w);
std::string_view to_string(MagnitudeScale s);
Window parse_window(std::string_view name);
MagnitudeScale parse_magnitude_scale(std::string_view name);

// The window length equals fft_size.
struct StftConfig {
  std::size_t fft_size = 256;
  Window window = Window::Hann;
  std::size_t hop = 128;
  MagnitudeScale scale = MagnitudeScale::Linear;

  void validate() const;
};

// Time-frequency image: rows are time frames, columns are frequency bins.
// Column 0 is the most negative frequency (-0.5 cycles/sample).
struct Tfi {
  Matrix magnitudes;
  StftConfig config;

  std::size_t frames() const { return magnitudes.rows(); }
  std::size_t bins() const { return magnitudes.cols(); }
};

// Periodic window of length n.
std::vector<double> window_coefficients(Window window, std::size_t n);

std::size_t frame_count(std::size_t length, const StftConfig& config);

// Magnitude STFT at stride `hop`; a trailing partial frame is dropped.
// LogDb maps |X| to 20 log10(1 + |X|), which keeps entries nonnegative.
Tfi stft(std::span<const Sample> samples, const StftConfig& config);
inline Tfi stft(const IqRecord& record, const StftConfig& config) {
  return stft(record.samples, config);
}

// 3 x H x W image with identical channels, min-max scaled to [0, 1].
// A constant TFI maps to all zeros.
Tensor3 to_image(const Tfi& tfi);

// Axis convention for the traditional energy measurement. Literal sums each
// row (time frame) across frequency and picks the strongest row; Transposed
// sums each frequency column across time and picks the strongest column.
enum class EnergyAxis { Literal, Transposed };

std::vector<double> temporal_energy(const Tfi& tfi, EnergyAxis axis = EnergyAxis::Literal);

// 0-based argmax; ties go to the smallest index.
std::size_t max_energy_bin(std::span<const double> energy);

// Mean magnitude along the strongest row (or column, for Transposed).
double traditional_energy_score(const Tfi& tfi, EnergyAxis axis = EnergyAxis::Literal);

// 8-bit RGB PNG of a 3 x H x W image with values in [0, 1]. Rows are image
// rows (time), columns image columns (frequency).
void write_png(const Tensor3& image, const std::filesystem::path& path);

// Reads an 8-bit RGB PNG back as a 3 x H x W image with values q / 255.
Tensor3 read_png(const std::filesystem::path& path);

// The value grid a PNG round trip preserves exactly.
Tensor3 quantize_image(const Tensor3& image);

}  // namespace rfood
