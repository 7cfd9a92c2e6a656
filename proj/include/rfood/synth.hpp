// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfood {

using Sample = std::complex<float>;

inline constexpr int kOodLabel = -1;
inline constexpr int kNoiseLabel = -2;

// Passing this SNR to add_awgn disables noise.
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct IqRecord {
  std::vector<Sample> samples;
  double sample_rate = 1.0;
  int label = 0;
  double snr_db = kNoNoise;
  std::uint64_t seed = 0;
};

// A frequency-hopping burst train. Classes differ both in the hop set and in
// burst/gap timing.
struct ProtocolSpec {
  std::vector<double> hop_frequencies;  // normalized, in (-0.5, 0.5)
  std::size_t burst_len = 256;
  std::size_t gap_len = 0;
  double amplitude = 1.0;

  void validate() const;
};

enum class OodKind { FixedTone, WidebandBurst, FastNarrowHop };

std::string_view to_string(OodKind kind);
OodKind parse_ood_kind(std::string_view name);

// One ID record. Start phase, burst-schedule offset and first hop are drawn
// from `record_seed`.
IqRecord gen_id_record(const ProtocolSpec& spec, std::size_t length,
                       std::uint64_t record_seed, int label = 0);

// Record i uses seed derive_seed(seed, {i}).
std::vector<IqRecord> gen_id(const ProtocolSpec& spec, std::size_t n_samples,
                             std::size_t length, std::uint64_t seed, int label = 0);

IqRecord gen_ood_record(OodKind kind, std::size_t length, std::uint64_t record_seed);

std::vector<IqRecord> gen_ood(OodKind kind, std::size_t n_samples, std::size_t length,
                              std::uint64_t seed);

// Mean squared magnitude.
double signal_power(std::span<const Sample> samples);

// Adds circular complex Gaussian noise so that 10 log10(P_signal / P_noise)
// equals `snr_db`, with P measured over the whole record.
IqRecord add_awgn(const IqRecord& record, double snr_db, std::uint64_t seed);

// Inclusive arithmetic grid; the default is -15..15 dB in 2 dB steps.
std::vector<double> snr_grid(double lo = -15.0, double hi = 15.0, double step = 2.0);

// Four desk-scale protocol classes.
std::vector<ProtocolSpec> default_protocols();

// I/Q record file ("DIQ1").
std::string encode_iq(const IqRecord& record);
IqRecord decode_iq(std::string_view bytes);
void write_iq(const IqRecord& record, const std::filesystem::path& path);
IqRecord read_iq(const std::filesystem::path& path);

inline constexpr std::uint32_t kIqFormatVersion = 1;

}  // namespace rfood
