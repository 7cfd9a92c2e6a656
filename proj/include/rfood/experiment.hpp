// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rfood/dataset.hpp"
#include "rfood/features.hpp"
#include "rfood/metrics.hpp"
#include "rfood/scoring.hpp"
#include "rfood/tfi.hpp"

namespace rfood {

// Detector variants. Full is the complete method; SpatialOnly, ChannelOnly
// and NoSelection drop selection stages; EnergyOnly keeps full selection but
// scores with energy alone (lambda = 1); MaxSoftmax and TraditionalEnergy are
// baselines (max softmax on unselected features, mean magnitude of the
// strongest TFI row).
enum class Variant {
  Full,
  SpatialOnly,
  ChannelOnly,
  NoSelection,
  MaxSoftmax,
  TraditionalEnergy,
  EnergyOnly
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct PipelineConfig {
  StftConfig stft;
  ExtractorSpec extractor;
  SelectionConfig selection;
  TrainConfig train;
  FusionConfig fusion;
  double retention = 0.95;
  Variant variant = Variant::Full;
  bool id_positive = true;
  EnergyAxis energy_axis = EnergyAxis::Literal;

  void validate() const;
};

// Calibration settings implied by the variant.
CalibrationConfig calibration_config(const PipelineConfig& config);

// Per-record features plus the traditional TFI energy score.
struct FeatureSet {
  std::vector<DatasetEntry> entries;
  std::vector<FeatureTensor> features;
  std::vector<double> traditional;  // empty when built from feature files
};

// STFT -> image -> reference features for every manifest entry. Records are
// processed in parallel by index; the result does not depend on `threads`.
FeatureSet build_features(const DatasetManifest& manifest, const RecordSource& source,
                          const PipelineConfig& config, unsigned threads = 0);

// Loads "DFTF" files listed in a feature manifest (paths relative to `base`).
FeatureSet load_feature_set(const FeatureManifest& manifest, const std::filesystem::path& base);

struct ExperimentResult {
  MetricsReport metrics;
  std::vector<LabeledScore> test_scores;
  std::size_t n_test_id = 0;
  std::size_t n_test_ood = 0;
};

// Calibrates on train, fits normalizer and threshold on val, scores test.
ExperimentResult evaluate(const FeatureSet& set, const PipelineConfig& config);

ExperimentResult run_experiment(const DatasetManifest& manifest, const RecordSource& source,
                                const PipelineConfig& config);

nlohmann::json to_json(const ExperimentResult& result, const PipelineConfig& config,
                       const nlohmann::json& seeds);

enum class SweepKind { AlphaBeta, Lambda, Snr, OodHoldout };

std::string_view to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view name);

using GridPoint = std::variant<double, std::pair<double, double>, OodKind>;

// alpha_beta: "a:b,a:b,..."; lambda and snr: "x,y,..."; ood_holdout: kind
// names. "default" selects default_grid(kind).
std::vector<GridPoint> parse_grid(SweepKind kind, std::string_view text,
                                  const SynthConfig& data = {});

// alpha_beta: {0, 0.1, ..., 1}^2; lambda: {0, 0.1, ..., 1}; snr: -15..15
// step 2; ood_holdout: the configured OOD kinds.
std::vector<GridPoint> default_grid(SweepKind kind, const SynthConfig& data = {});

std::string format_point(const GridPoint& point);

struct SweepRow {
  std::string point;
  MetricsReport metrics;
};

std::vector<SweepRow> sweep(SweepKind kind, std::span<const GridPoint> grid,
                            const SynthConfig& data, const PipelineConfig& base);

// Header row then one row per point, values in fixed 6-decimal notation.
// A leading '#' line records the seeds.
std::string sweep_csv(std::span<const SweepRow> rows, const nlohmann::json& seeds);

}  // namespace rfood
