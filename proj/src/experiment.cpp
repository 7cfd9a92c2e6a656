// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/experiment.hpp"

#include <algorithm>
#include <exception>
#include <memory>
#include <thread>

#include "rfood/error.hpp"

namespace rfood {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::SpatialOnly: return "spatial_only";
    case Variant::ChannelOnly: return "channel_only";
    case Variant::NoSelection: return "no_selection";
    case Variant::MaxSoftmax: return "max_softmax";
    case Variant::TraditionalEnergy: return "traditional_energy";
    case Variant::EnergyOnly: return "energy_only";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::Full, Variant::SpatialOnly, Variant::ChannelOnly, Variant::NoSelection,
                 Variant::MaxSoftmax, Variant::TraditionalEnergy, Variant::EnergyOnly})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  stft.validate();
  extractor.validate();
  selection.validate();
  train.validate();
  fusion.validate();
  if (!(retention > 0.0 && retention < 1.0)) throw ConfigError("retention must be in (0, 1)");
}

CalibrationConfig calibration_config(const PipelineConfig& config) {
  CalibrationConfig c;
  c.selection = config.selection;
  c.train = config.train;
  c.fusion = config.fusion;
  c.retention = config.retention;
  switch (config.variant) {
    case Variant::Full: c.variant = SelectionVariant::Full; break;
    case Variant::SpatialOnly: c.variant = SelectionVariant::SpatialOnly; break;
    case Variant::ChannelOnly: c.variant = SelectionVariant::ChannelOnly; break;
    case Variant::NoSelection:
    case Variant::TraditionalEnergy: c.variant = SelectionVariant::None; break;
    case Variant::MaxSoftmax:
      c.variant = SelectionVariant::None;
      c.score_mode = ScoreMode::MaxSoftmax;
      break;
    case Variant::EnergyOnly:
      c.variant = SelectionVariant::Full;
      c.fusion.lambda = 1.0;
      break;
  }
  c.seeds = {{"extractor", config.extractor.seed}, {"train", config.train.seed}};
  return c;
}

FeatureSet build_features(const DatasetManifest& manifest, const RecordSource& source,
                          const PipelineConfig& config, unsigned threads) {
  config.validate();
  if (config.extractor.kind != ExtractorKind::ReferenceProjection)
    throw ConfigError("build_features requires the reference_projection extractor");
  FeatureSet set;
  set.entries = manifest.entries;
  const std::size_t n = manifest.entries.size();
  set.features.resize(n);
  set.traditional.resize(n);
  if (n == 0) return set;

  const auto process = [&](std::size_t i, const ReferenceExtractor* extractor) {
    const auto rec = source.load(manifest.entries[i]);
    const Tfi tfi = stft(rec, config.stft);
    set.traditional[i] = traditional_energy_score(tfi, config.energy_axis);
    const Tensor3 image = to_image(tfi);
    set.features[i] = extractor->extract(image);
    set.features[i].label = manifest.entries[i].label < 0 ? kUnknownLabel
                                                          : manifest.entries[i].label;
  };

  const auto first = source.load(manifest.entries[0]);
  const std::size_t frames = frame_count(first.samples.size(), config.stft);
  if (frames == 0) throw Error("record shorter than fft_size");
  const ReferenceExtractor extractor(config.extractor, frames, config.stft.fft_size);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) process(i, &extractor);
    return set;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) process(i, &extractor);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return set;
}

FeatureSet load_feature_set(const FeatureManifest& manifest, const std::filesystem::path& base) {
  FeatureSet set;
  for (const auto& f : manifest.files) {
    DatasetEntry e;
    e.path = f.path;
    e.label = f.label;
    e.split = f.split;
    set.entries.push_back(e);
    auto t = read_features(base / f.path);
    t.label = f.label;
    set.features.push_back(std::move(t));
  }
  return set;
}

ExperimentResult evaluate(const FeatureSet& set, const PipelineConfig& config) {
  config.validate();
  DatasetManifest m;
  m.entries = set.entries;
  validate_partition(m);
  if (set.features.size() != set.entries.size())
    throw DimensionError("feature set: entries and features differ in length");
  const bool traditional = config.variant == Variant::TraditionalEnergy;
  if (traditional && set.traditional.size() != set.entries.size())
    throw ConfigError("traditional_energy variant needs TFI scores (not available from files)");

  std::vector<FeatureTensor> train, val;
  std::vector<double> val_traditional;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& e = set.entries[i];
    if (e.split == Split::Train) train.push_back(set.features[i]);
    if (e.split == Split::Val && !e.is_ood()) {
      val.push_back(set.features[i]);
      if (traditional) val_traditional.push_back(set.traditional[i]);
    }
  }
  const auto cal = calibrate(train, val, calibration_config(config));
  const auto& artifact = cal.artifact;
  const double gamma =
      traditional ? calibrate_threshold(val_traditional, config.retention) : artifact.gamma;

  ExperimentResult result;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& e = set.entries[i];
    if (e.split != Split::Test) continue;
    const auto report = score_sample(artifact, set.features[i]);
    const double s = traditional ? set.traditional[i] : report.s_fused;
    result.test_scores.push_back({s, !e.is_ood()});
    if (e.is_ood()) {
      ++result.n_test_ood;
    } else {
      ++result.n_test_id;
      if (static_cast<int>(report.predicted_class) == e.label) ++correct;
    }
  }
  if (result.n_test_id == 0 || result.n_test_ood == 0)
    throw ProtocolError("test split needs both ID and OOD records");
  result.metrics = make_report(result.test_scores, gamma, config.id_positive);
  result.metrics.closed_set_accuracy =
      static_cast<double>(correct) / static_cast<double>(result.n_test_id);
  return result;
}

ExperimentResult run_experiment(const DatasetManifest& manifest, const RecordSource& source,
                                const PipelineConfig& config) {
  validate_partition(manifest);
  return evaluate(build_features(manifest, source, config), config);
}

nlohmann::json to_json(const ExperimentResult& result, const PipelineConfig& config,
                       const nlohmann::json& seeds) {
  return {{"variant", to_string(config.variant)},
          {"positive_class", config.id_positive ? "id" : "ood"},
          {"metrics", to_json(result.metrics)},
          {"n_test_id", result.n_test_id},
          {"n_test_ood", result.n_test_ood},
          {"seeds", seeds}};
}

}  // namespace rfood
