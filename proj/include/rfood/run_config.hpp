// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "json.hpp"
#include "rfood/dataset.hpp"
#include "rfood/experiment.hpp"

namespace rfood {

// Everything a run needs. Every key is optional; unknown keys are rejected.
//
//   { "synth":     { classes, ood_kinds, records_per_class, records_per_ood_kind,
//                    length, snr_db, split: {train, val, test}, seed },
//     "stft":      { fft_size, hop, window, scale },
//     "extractor": { kind, channels, height, width, seed },
//     "selection": { alpha, beta, sim_mode, epsilon },
//     "train":     { learning_rate, epochs, l2, seed, standardize },
//     "fusion":    { lambda, grad_mode },
//     "retention": 0.95, "variant": "full", "positive_class": "id",
//     "energy_axis": "literal" }
struct RunConfig {
  SynthConfig synth;
  PipelineConfig pipeline;

  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// Every seed that influences a run.
nlohmann::json seeds_json(const RunConfig& config);

}  // namespace rfood
