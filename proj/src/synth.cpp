// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "rfood/binary_io.hpp"
#include "rfood/error.hpp"
#include "rfood/seed.hpp"

namespace rfood {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(j 2 pi f n + j phase) with the cycle count reduced before scaling, so
// long records keep full phase precision.
std::complex<double> oscillator(double f, std::size_t n, double phase) {
  double cycles = f * static_cast<double>(n);
  cycles -= std::floor(cycles);
  return std::polar(1.0, kTwoPi * cycles + phase);
}

void require_length(std::size_t length, std::size_t n_samples) {
  if (length == 0) throw ConfigError("record length must be positive");
  if (n_samples == 0) throw ConfigError("n_samples must be at least 1");
}

// Windowed-sinc lowpass with the given cutoff (cycles/sample).
std::vector<double> lowpass_taps(double cutoff, std::size_t taps) {
  std::vector<double> h(taps);
  const double mid = static_cast<double>(taps - 1) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < taps; ++i) {
    double t = static_cast<double>(i) - mid;
    double sinc = t == 0.0 ? 2.0 * cutoff
                           : std::sin(kTwoPi * cutoff * t) / (std::numbers::pi * t);
    double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) /
                                    static_cast<double>(taps - 1));
    h[i] = sinc * w;
    sum += h[i];
  }
  for (auto& v : h) v /= sum;
  return h;
}

IqRecord fixed_tone(std::size_t length, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> freq(-0.45, 0.45);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const double f = freq(rng);
  const double p = phase(rng);
  IqRecord rec;
  rec.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n) rec.samples[n] = Sample(oscillator(f, n, p));
  return rec;
}

IqRecord wideband_burst(std::size_t length, std::mt19937_64& rng) {
  constexpr std::size_t kTaps = 33;
  constexpr double kBandwidth = 0.15;
  std::uniform_int_distribution<std::size_t> burst_len(512, 2048);
  std::uniform_int_distribution<std::size_t> gap_len(256, 1024);
  std::uniform_real_distribution<double> center(-0.25, 0.25);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  const auto taps = lowpass_taps(kBandwidth / 2.0, kTaps);
  // Normalizes filtered noise to unit power.
  double tap_energy = 0.0;
  for (double t : taps) tap_energy += t * t;
  const double gain = 1.0 / std::sqrt(tap_energy);

  IqRecord rec;
  rec.samples.assign(length, Sample(0.0f, 0.0f));
  std::size_t pos = std::uniform_int_distribution<std::size_t>(0, 1024)(rng);
  while (pos < length) {
    const std::size_t len = std::min(burst_len(rng), length - pos);
    const double fc = center(rng);
    std::vector<std::complex<double>> white(len + kTaps - 1);
    for (auto& w : white) w = {gauss(rng), gauss(rng)};
    for (std::size_t n = 0; n < len; ++n) {
      std::complex<double> acc = 0.0;
      for (std::size_t t = 0; t < kTaps; ++t) acc += taps[t] * white[n + t];
      rec.samples[pos + n] = Sample(gain * acc * oscillator(fc, pos + n, 0.0));
    }
    pos += len + gap_len(rng);
  }
  return rec;
}

IqRecord fast_narrow_hop(std::size_t length, std::mt19937_64& rng) {
  constexpr std::size_t kHopLen = 48;
  constexpr int kChannels = 64;
  std::uniform_int_distribution<int> channel(0, kChannels - 1);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  IqRecord rec;
  rec.samples.resize(length);
  const double p = phase(rng);
  double f = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    if (n % kHopLen == 0)
      f = -0.5 + (static_cast<double>(channel(rng)) + 0.5) / kChannels;
    rec.samples[n] = Sample(oscillator(f, n, p));
  }
  return rec;
}

}  // namespace

void ProtocolSpec::validate() const {
  if (hop_frequencies.empty()) throw ConfigError("protocol: hop_frequencies is empty");
  for (double f : hop_frequencies)
    if (!(f > -0.5 && f < 0.5))
      throw ConfigError("protocol: hop frequency outside (-0.5, 0.5)");
  if (burst_len < 1) throw ConfigError("protocol: burst_len must be >= 1");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw ConfigError("protocol: amplitude must be positive");
}

std::string_view to_string(OodKind kind) {
  switch (kind) {
    case OodKind::FixedTone: return "fixed_tone";
    case OodKind::WidebandBurst: return "wideband_burst";
    case OodKind::FastNarrowHop: return "fast_narrow_hop";
  }
  return "unknown";
}

OodKind parse_ood_kind(std::string_view name) {
  for (auto k : {OodKind::FixedTone, OodKind::WidebandBurst, OodKind::FastNarrowHop})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown OOD kind '" + std::string(name) + "'");
}

IqRecord gen_id_record(const ProtocolSpec& spec, std::size_t length,
                       std::uint64_t record_seed, int label) {
  spec.validate();
  if (length < spec.burst_len) throw ConfigError("record length shorter than burst_len");
  std::mt19937_64 rng(record_seed);
  const std::size_t period = spec.burst_len + spec.gap_len;
  const std::size_t hops = spec.hop_frequencies.size();
  const double phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  const std::size_t offset = std::uniform_int_distribution<std::size_t>(0, period - 1)(rng);
  const std::size_t first_hop = std::uniform_int_distribution<std::size_t>(0, hops - 1)(rng);

  IqRecord rec;
  rec.label = label;
  rec.seed = record_seed;
  rec.samples.assign(length, Sample(0.0f, 0.0f));
  for (std::size_t n = 0; n < length; ++n) {
    const std::size_t m = n + offset;
    if (m % period >= spec.burst_len) continue;
    const double f = spec.hop_frequencies[(first_hop + m / period) % hops];
    rec.samples[n] = Sample(spec.amplitude * oscillator(f, n, phase));
  }
  return rec;
}

std::vector<IqRecord> gen_id(const ProtocolSpec& spec, std::size_t n_samples,
                             std::size_t length, std::uint64_t seed, int label) {
  require_length(length, n_samples);
  std::vector<IqRecord> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    out.push_back(gen_id_record(spec, length, derive_seed(seed, {i}), label));
  return out;
}

IqRecord gen_ood_record(OodKind kind, std::size_t length, std::uint64_t record_seed) {
  if (length == 0) throw ConfigError("record length must be positive");
  std::mt19937_64 rng(record_seed);
  IqRecord rec;
  switch (kind) {
    case OodKind::FixedTone: rec = fixed_tone(length, rng); break;
    case OodKind::WidebandBurst: rec = wideband_burst(length, rng); break;
    case OodKind::FastNarrowHop: rec = fast_narrow_hop(length, rng); break;
  }
  rec.label = kOodLabel;
  rec.seed = record_seed;
  return rec;
}

std::vector<IqRecord> gen_ood(OodKind kind, std::size_t n_samples, std::size_t length,
                              std::uint64_t seed) {
  require_length(length, n_samples);
  std::vector<IqRecord> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    out.push_back(gen_ood_record(kind, length, derive_seed(seed, {i})));
  return out;
}

double signal_power(std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(std::complex<double>(s));
  return acc / static_cast<double>(samples.size());
}

IqRecord add_awgn(const IqRecord& record, double snr_db, std::uint64_t seed) {
  if (record.samples.empty()) throw Error("add_awgn: empty record");
  if (std::isinf(snr_db) && snr_db > 0) return record;
  if (!std::isfinite(snr_db)) throw ConfigError("add_awgn: SNR must be finite or +inf");
  const double p_signal = signal_power(record.samples);
  if (!(p_signal > 0.0) || !std::isfinite(p_signal))
    throw Error("add_awgn: signal power is zero, SNR undefined");
  const double p_noise = p_signal / std::pow(10.0, snr_db / 10.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(p_noise / 2.0));
  IqRecord out = record;
  out.snr_db = snr_db;
  for (auto& s : out.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    s = Sample(static_cast<float>(s.real() + re), static_cast<float>(s.imag() + im));
  }
  return out;
}

std::vector<double> snr_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ConfigError("snr_grid: invalid range");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) grid.push_back(lo + step * static_cast<double>(i));
  return grid;
}

std::vector<ProtocolSpec> default_protocols() {
  return {
      {{-0.30, 0.10}, 1024, 1024, 1.0},
      {{-0.10, 0.25, 0.40}, 512, 512, 1.0},
      {{0.05, -0.20, 0.30, -0.40}, 2048, 512, 1.0},
      {{-0.35, 0.20}, 256, 768, 1.0},
  };
}

std::string encode_iq(const IqRecord& record) {
  ByteWriter w;
  w.magic("DIQ1");
  w.u32(kIqFormatVersion);
  w.u64(record.samples.size());
  w.f64(record.sample_rate);
  w.i32(record.label);
  w.f64(record.snr_db);
  for (const auto& s : record.samples) {
    w.f32(s.real());
    w.f32(s.imag());
  }
  return w.release();
}

IqRecord decode_iq(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("DIQ1");
  const auto version = r.u32("version");
  if (version != kIqFormatVersion)
    throw ParseError("unsupported version " + std::to_string(version));
  const auto count = r.u64("sample count");
  IqRecord rec;
  rec.sample_rate = r.f64("sample_rate");
  rec.label = r.i32("label");
  rec.snr_db = r.f64("snr_db");
  if (count > r.remaining() / 8 || count * 8 != r.remaining())
    throw ParseError("payload length mismatch: header declares " + std::to_string(count) +
                     " samples, payload holds " + std::to_string(r.remaining()) + " bytes");
  rec.samples.resize(count);
  for (auto& s : rec.samples) {
    const float re = r.f32("payload");
    const float im = r.f32("payload");
    s = Sample(re, im);
  }
  return rec;
}

void write_iq(const IqRecord& record, const std::filesystem::path& path) {
  write_file_atomic(path, encode_iq(record));
}

IqRecord read_iq(const std::filesystem::path& path) { return decode_iq(read_file(path)); }

}  // namespace rfood
