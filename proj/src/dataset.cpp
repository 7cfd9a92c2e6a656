// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "rfood/binary_io.hpp"
#include "rfood/error.hpp"
#include "rfood/seed.hpp"

namespace rfood {

namespace {

constexpr std::uint64_t kIdStream = 0;
constexpr std::uint64_t kOodStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

std::size_t portion(std::size_t n, double ratio) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
}

std::string record_path(std::string_view stem, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%05zu.diq", index);
  return "records/" + std::string(stem) + buf;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view name) {
  for (auto s : {Split::Train, Split::Val, Split::Test})
    if (to_string(s) == name) return s;
  throw ParseError("unknown split '" + std::string(name) + "'");
}

void SynthConfig::validate() const {
  if (classes.size() < 2) throw ConfigError("synth: at least 2 ID classes required");
  if (ood_kinds.empty()) throw ConfigError("synth: at least 1 OOD kind required");
  for (const auto& c : classes) {
    c.validate();
    if (length < c.burst_len) throw ConfigError("synth: length shorter than a burst");
  }
  if (records_per_class < 1) throw ConfigError("synth: records_per_class must be >= 1");
  if (length == 0) throw ConfigError("synth: length must be positive");
  if (snr_db.empty()) throw ConfigError("synth: snr_db list is empty");
  for (double s : snr_db)
    if (std::isnan(s) || (std::isinf(s) && s < 0))
      throw ConfigError("synth: invalid SNR value");
  if (split.train < 0 || split.val < 0 || split.test < 0)
    throw ConfigError("synth: split ratios must be nonnegative");
  if (std::abs(split.train + split.val + split.test - 1.0) > 1e-9)
    throw ConfigError("synth: split ratios must sum to 1");
}

DatasetManifest make_dataset(const SynthConfig& config) {
  config.validate();
  DatasetManifest manifest;
  const std::size_t n = config.records_per_class;
  const std::size_t n_train = portion(n, config.split.train);
  const std::size_t n_val = std::min(n - n_train, portion(n, config.split.val));

  for (std::size_t c = 0; c < config.classes.size(); ++c) {
    manifest.class_names.push_back("class_" + std::to_string(c));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(config.seed, {kSplitStream, c}));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Split> split_of(n, Split::Test);
    for (std::size_t r = 0; r < n; ++r)
      split_of[order[r]] = r < n_train ? Split::Train
                           : r < n_train + n_val ? Split::Val
                                                 : Split::Test;
    for (std::size_t i = 0; i < n; ++i) {
      DatasetEntry e;
      e.path = record_path("id_c" + std::to_string(c), i);
      e.label = static_cast<int>(c);
      e.split = split_of[i];
      e.snr_db = config.snr_db[i % config.snr_db.size()];
      e.seed = derive_seed(config.seed, {kIdStream, c, i});
      e.index = i;
      manifest.entries.push_back(std::move(e));
    }
  }
  for (std::size_t k = 0; k < config.ood_kinds.size(); ++k) {
    const OodKind kind = config.ood_kinds[k];
    for (std::size_t i = 0; i < config.records_per_ood_kind; ++i) {
      DatasetEntry e;
      e.path = record_path("ood_" + std::string(to_string(kind)), i);
      e.label = kOodLabel;
      e.split = Split::Test;
      e.snr_db = config.snr_db[i % config.snr_db.size()];
      e.seed = derive_seed(config.seed, {kOodStream, static_cast<std::uint64_t>(kind), i});
      e.index = i;
      e.ood_kind = kind;
      manifest.entries.push_back(std::move(e));
    }
  }
  validate_partition(manifest);
  return manifest;
}

void validate_partition(const DatasetManifest& manifest) {
  for (const auto& e : manifest.entries)
    if (e.is_ood() && e.split != Split::Test)
      throw ProtocolError("OOD record '" + e.path + "' assigned to " +
                          std::string(to_string(e.split)) + " split");
}

nlohmann::json to_json(const DatasetManifest& manifest) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json r;
    r["path"] = e.path;
    r["label"] = e.label;
    r["split"] = to_string(e.split);
    // +inf (noise-free) has no JSON representation.
    r["snr_db"] = std::isfinite(e.snr_db) ? nlohmann::json(e.snr_db) : nlohmann::json(nullptr);
    r["seed"] = e.seed;
    r["index"] = e.index;
    if (e.ood_kind) r["ood_kind"] = to_string(*e.ood_kind);
    records.push_back(std::move(r));
  }
  return {{"class_names", manifest.class_names}, {"records", std::move(records)}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& r : j.at("records")) {
      DatasetEntry e;
      e.path = r.at("path").get<std::string>();
      e.label = r.at("label").get<int>();
      e.split = parse_split(r.at("split").get<std::string>());
      e.snr_db = r.at("snr_db").is_null() ? kNoNoise : r.at("snr_db").get<double>();
      e.seed = r.at("seed").get<std::uint64_t>();
      e.index = r.value("index", std::size_t{0});
      if (r.contains("ood_kind")) e.ood_kind = parse_ood_kind(r.at("ood_kind").get<std::string>());
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("dataset manifest: ") + ex.what());
  }
  return m;
}

SynthSource::SynthSource(SynthConfig config) : config_(std::move(config)) {
  config_.validate();
}

IqRecord SynthSource::load(const DatasetEntry& entry) const {
  IqRecord clean;
  if (entry.is_ood()) {
    if (!entry.ood_kind) throw ProtocolError("OOD entry '" + entry.path + "' has no kind");
    clean = gen_ood_record(*entry.ood_kind, config_.length, entry.seed);
  } else {
    if (static_cast<std::size_t>(entry.label) >= config_.classes.size())
      throw ProtocolError("entry label out of range: " + std::to_string(entry.label));
    clean = gen_id_record(config_.classes[static_cast<std::size_t>(entry.label)],
                          config_.length, entry.seed, entry.label);
  }
  auto rec = add_awgn(clean, entry.snr_db, derive_seed(entry.seed, {kNoiseStream}));
  rec.seed = entry.seed;
  return rec;
}

IqRecord FileSource::load(const DatasetEntry& entry) const {
  auto rec = read_iq(base_ / entry.path);
  rec.seed = entry.seed;
  return rec;
}

void write_dataset(const DatasetManifest& manifest, const RecordSource& source,
                   const std::filesystem::path& dir) {
  for (const auto& e : manifest.entries) write_iq(source.load(e), dir / e.path);
  write_file_atomic(dir / "manifest.json", to_json(manifest).dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError("dataset manifest '" + path.string() + "': " + ex.what());
  }
  return manifest_from_json(j);
}

}  // namespace rfood
