// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rfood/synth.hpp"

namespace rfood {

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SynthConfig {
  std::vector<ProtocolSpec> classes = default_protocols();
  std::vector<OodKind> ood_kinds = {OodKind::WidebandBurst, OodKind::FastNarrowHop};
  std::size_t records_per_class = 200;
  std::size_t records_per_ood_kind = 100;
  std::size_t length = 16384;
  // Records cycle through these SNRs by index.
  std::vector<double> snr_db = {10.0};
  SplitRatios split;
  std::uint64_t seed = 1;

  void validate() const;
};

// Reference figures of the full-scale corpus the desk benchmark stands in for.
struct ReferenceScale {
  static constexpr std::size_t kCategories = 16;
  static constexpr std::size_t kRecords = 31873;
  static constexpr double kSnrLoDb = -15.0;
  static constexpr double kSnrHiDb = 15.0;
  static constexpr double kSnrStepDb = 2.0;
};

struct DatasetEntry {
  std::string path;
  int label = 0;
  Split split = Split::Train;
  double snr_db = kNoNoise;
  std::uint64_t seed = 0;
  // Index within its class or OOD kind.
  std::size_t index = 0;
  std::optional<OodKind> ood_kind;

  bool is_ood() const { return label < 0; }
};

struct DatasetManifest {
  std::vector<DatasetEntry> entries;
  std::vector<std::string> class_names;
};

// Assigns labels, SNRs, seeds and splits. OOD records go to the test split
// only. Records are not materialized; see SynthSource.
DatasetManifest make_dataset(const SynthConfig& config);

// Throws ProtocolError if an OOD record sits in train or val.
void validate_partition(const DatasetManifest& manifest);

nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);

class RecordSource {
 public:
  virtual ~RecordSource() = default;
  virtual IqRecord load(const DatasetEntry& entry) const = 0;
};

// Regenerates records from their manifest entry.
class SynthSource : public RecordSource {
 public:
  explicit SynthSource(SynthConfig config);
  IqRecord load(const DatasetEntry& entry) const override;

 private:
  SynthConfig config_;
};

// Reads DIQ1 files relative to a base directory.
class FileSource : public RecordSource {
 public:
  explicit FileSource(std::filesystem::path base) : base_(std::move(base)) {}
  IqRecord load(const DatasetEntry& entry) const override;

 private:
  std::filesystem::path base_;
};

// Writes every record plus manifest.json under `dir`.
void write_dataset(const DatasetManifest& manifest, const RecordSource& source,
                   const std::filesystem::path& dir);

DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace rfood
