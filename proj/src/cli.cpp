// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rfood/binary_io.hpp"
#include "rfood/dataset.hpp"
#include "rfood/error.hpp"
#include "rfood/experiment.hpp"
#include "rfood/features.hpp"
#include "rfood/run_config.hpp"
#include "rfood/scoring.hpp"
#include "rfood/tfi.hpp"

namespace rfood {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for a missing or inconsistent flag; the message names the flag.
struct FlagError : Error {
  using Error::Error;
};

struct CommonOpts {
  std::string config;
};

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw FlagError(std::string("missing required flag ") + flag);
}

RunConfig load_config(const CommonOpts& o) {
  return o.config.empty() ? RunConfig{} : load_run_config(o.config);
}

template <typename T>
void override(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --- synth -----------------------------------------------------------------

struct SynthOpts : CommonOpts {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> snr;
};

void run_synth(const SynthOpts& o) {
  require_path(o.out, "--out");
  auto cfg = load_config(o);
  override(cfg.synth.seed, o.seed);
  if (o.snr) cfg.synth.snr_db = {*o.snr};
  cfg.validate();
  const auto manifest = make_dataset(cfg.synth);
  write_dataset(manifest, SynthSource(cfg.synth), o.out);
}

// --- tfi -------------------------------------------------------------------

struct TfiOpts : CommonOpts {
  std::string input, dataset, out;
  std::optional<std::size_t> fft_size, hop;
  std::optional<std::string> window, scale;
};

StftConfig stft_config(const TfiOpts& o) {
  auto cfg = load_config(o).pipeline.stft;
  override(cfg.fft_size, o.fft_size);
  override(cfg.hop, o.hop);
  if (o.window) cfg.window = parse_window(*o.window);
  if (o.scale) cfg.scale = parse_magnitude_scale(*o.scale);
  cfg.validate();
  return cfg;
}

void run_tfi(const TfiOpts& o) {
  require_path(o.out, "--out");
  if (o.input.empty() == o.dataset.empty())
    throw FlagError("exactly one of --input or --dataset is required");
  const auto cfg = stft_config(o);
  if (!o.input.empty()) {
    write_png(to_image(stft(read_iq(o.input), cfg)), o.out);
    return;
  }
  const auto manifest = read_manifest(o.dataset);
  const FileSource source(fs::path(o.dataset).parent_path());
  for (const auto& e : manifest.entries) {
    auto png = fs::path(e.path).replace_extension(".png");
    write_png(to_image(stft(source.load(e), cfg)), fs::path(o.out) / png);
  }
}

// --- extract ---------------------------------------------------------------

struct ExtractOpts : CommonOpts {
  std::string input, dataset, out;
};

void run_extract(const ExtractOpts& o) {
  require_path(o.out, "--out");
  if (o.input.empty() == o.dataset.empty())
    throw FlagError("exactly one of --input or --dataset is required");
  const auto cfg = load_config(o);
  if (!o.input.empty()) {
    write_features(extract_reference(read_png(o.input), cfg.pipeline.extractor), o.out);
    return;
  }
  const auto manifest = read_manifest(o.dataset);
  const FileSource source(fs::path(o.dataset).parent_path());
  const auto set = build_features(manifest, source, cfg.pipeline);
  FeatureManifest fm;
  fm.class_names = manifest.class_names;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& e = set.entries[i];
    FeatureManifestEntry f;
    f.path = fs::path(e.path).replace_extension(".dftf").generic_string();
    f.label = e.label < 0 ? kUnknownLabel : e.label;
    f.split = e.split;
    write_features(set.features[i], fs::path(o.out) / f.path);
    fm.files.push_back(std::move(f));
  }
  write_feature_manifest(fm, fs::path(o.out) / "features.json");
}

// --- calibrate -------------------------------------------------------------

struct CalibrateOpts : CommonOpts {
  std::string features, out;
  std::optional<double> alpha, beta, lambda, retention;
  std::optional<std::string> sim_mode, grad_mode, variant;
};

void run_calibrate(const CalibrateOpts& o) {
  require_path(o.features, "--features");
  require_path(o.out, "--out");
  auto cfg = load_config(o);
  auto& p = cfg.pipeline;
  override(p.selection.alpha, o.alpha);
  override(p.selection.beta, o.beta);
  override(p.fusion.lambda, o.lambda);
  override(p.retention, o.retention);
  if (o.sim_mode) p.selection.sim_mode = parse_sim_mode(*o.sim_mode);
  if (o.grad_mode) p.fusion.grad_mode = parse_grad_mode(*o.grad_mode);
  if (o.variant) p.variant = parse_variant(*o.variant);
  cfg.validate();
  if (p.variant == Variant::TraditionalEnergy)
    throw FlagError("--variant traditional_energy has no calibration artifact");

  const auto fm = read_feature_manifest(o.features);
  const auto set = load_feature_set(fm, fs::path(o.features).parent_path());
  std::vector<FeatureTensor> train, val;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& e = set.entries[i];
    if (e.split == Split::Train) train.push_back(set.features[i]);
    if (e.split == Split::Val && !e.is_ood()) val.push_back(set.features[i]);
  }
  auto cc = calibration_config(p);
  cc.seeds = seeds_json(cfg);
  write_artifact(calibrate(train, val, cc).artifact, o.out);
}

// --- score -----------------------------------------------------------------

struct ScoreOpts {
  std::string artifact, features, out;
};

void run_score(const ScoreOpts& o) {
  require_path(o.artifact, "--artifact");
  require_path(o.features, "--features");
  require_path(o.out, "--out");
  const auto artifact = read_artifact(o.artifact);
  std::string lines;
  const auto emit = [&](const FeatureTensor& t) {
    lines += to_json(score_sample(artifact, t)).dump() + "\n";
  };
  if (fs::path(o.features).extension() == ".json") {
    const auto fm = read_feature_manifest(o.features);
    const auto base = fs::path(o.features).parent_path();
    for (const auto& f : fm.files) emit(read_features(base / f.path));
  } else {
    emit(read_features(o.features));
  }
  write_file_atomic(o.out, lines);
}

// --- eval ------------------------------------------------------------------

struct EvalOpts : CommonOpts {
  std::string features, dataset, out;
  std::optional<std::string> variant;
};

void run_eval(const EvalOpts& o) {
  require_path(o.config, "--config");
  require_path(o.out, "--out");
  if (!o.features.empty() && !o.dataset.empty())
    throw FlagError("--features and --dataset are mutually exclusive");
  auto cfg = load_config(o);
  if (o.variant) cfg.pipeline.variant = parse_variant(*o.variant);
  cfg.validate();
  ExperimentResult result;
  if (!o.features.empty()) {
    const auto fm = read_feature_manifest(o.features);
    result = evaluate(load_feature_set(fm, fs::path(o.features).parent_path()), cfg.pipeline);
  } else if (!o.dataset.empty()) {
    const FileSource source(fs::path(o.dataset).parent_path());
    result = run_experiment(read_manifest(o.dataset), source, cfg.pipeline);
  } else {
    result = run_experiment(make_dataset(cfg.synth), SynthSource(cfg.synth), cfg.pipeline);
  }
  auto j = to_json(result, cfg.pipeline, seeds_json(cfg));
  j["config"] = to_json(cfg);
  write_file_atomic(o.out, dump(j));
}

// --- sweep -----------------------------------------------------------------

struct SweepOpts : CommonOpts {
  std::string kind, grid = "default", out;
};

void run_sweep(const SweepOpts& o) {
  require_path(o.kind, "--kind");
  require_path(o.out, "--out");
  const auto cfg = load_config(o);
  const auto kind = parse_sweep_kind(o.kind);
  const auto grid = parse_grid(kind, o.grid, cfg.synth);
  const auto rows = sweep(kind, grid, cfg.synth, cfg.pipeline);
  write_file_atomic(o.out, sweep_csv(rows, seeds_json(cfg)));
}

std::string version_text() {
  return std::string("rfood ") + kToolVersion + " (artifact DCAL v" +
         std::to_string(kArtifactVersion) + ", features DFTF v" +
         std::to_string(kFeatureFormatVersion) + ", records DIQ1 v" +
         std::to_string(kIqFormatVersion) + ")";
}

std::string category(const std::exception& ex) {
  if (dynamic_cast<const FlagError*>(&ex)) return "usage";
  if (dynamic_cast<const ConfigError*>(&ex)) return "config";
  if (dynamic_cast<const ParseError*>(&ex)) return "parse";
  if (dynamic_cast<const DimensionError*>(&ex)) return "dimension";
  if (dynamic_cast<const ProtocolError*>(&ex)) return "protocol";
  return "runtime";
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Drone RF out-of-distribution detection toolkit", "rfood"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_text());

  SynthOpts synth_o;
  auto* synth_c = app.add_subcommand("synth", "Generate a synthetic IQ dataset");
  synth_c->add_option("--config", synth_o.config, "Run configuration (JSON)");
  synth_c->add_option("--out", synth_o.out, "Output dataset directory");
  synth_c->add_option("--seed", synth_o.seed, "Dataset seed");
  synth_c->add_option("--snr", synth_o.snr, "Single SNR in dB for every record");

  TfiOpts tfi_o;
  auto* tfi_c = app.add_subcommand("tfi", "Render time-frequency images");
  tfi_c->add_option("--config", tfi_o.config, "Run configuration (JSON)");
  tfi_c->add_option("--input", tfi_o.input, "Single IQ record (.diq)");
  tfi_c->add_option("--dataset", tfi_o.dataset, "Dataset manifest.json");
  tfi_c->add_option("--out", tfi_o.out, "Output PNG, or directory with --dataset");
  tfi_c->add_option("--fft-size", tfi_o.fft_size, "FFT size (power of two)");
  tfi_c->add_option("--hop", tfi_o.hop, "Hop between frames");
  tfi_c->add_option("--window", tfi_o.window, "hann | rect");
  tfi_c->add_option("--scale", tfi_o.scale, "linear | logdb");

  ExtractOpts ext_o;
  auto* ext_c = app.add_subcommand("extract", "Compute spatial feature tensors");
  ext_c->add_option("--config", ext_o.config, "Run configuration (JSON)");
  ext_c->add_option("--input", ext_o.input, "Single PNG image");
  ext_c->add_option("--dataset", ext_o.dataset, "Dataset manifest.json");
  ext_c->add_option("--out", ext_o.out, "Output .dftf, or directory with --dataset");

  CalibrateOpts cal_o;
  auto* cal_c = app.add_subcommand("calibrate", "Fit selection, head, normalizer and threshold");
  cal_c->add_option("--config", cal_o.config, "Run configuration (JSON)");
  cal_c->add_option("--features", cal_o.features, "Feature manifest (features.json)");
  cal_c->add_option("--out", cal_o.out, "Output artifact");
  cal_c->add_option("--alpha", cal_o.alpha, "Spatial similarity weight");
  cal_c->add_option("--beta", cal_o.beta, "Channel similarity weight");
  cal_c->add_option("--lambda", cal_o.lambda, "Energy weight in the fused score");
  cal_c->add_option("--sim-mode", cal_o.sim_mode, "scalar_literal | profile");
  cal_c->add_option("--grad-mode", cal_o.grad_mode, "max_logit | energy_grad");
  cal_c->add_option("--retention", cal_o.retention, "ID retention on validation");
  cal_c->add_option("--variant", cal_o.variant, "Detector variant");

  ScoreOpts score_o;
  auto* score_c = app.add_subcommand("score", "Score feature tensors with an artifact");
  score_c->add_option("--artifact", score_o.artifact, "Calibration artifact");
  score_c->add_option("--features", score_o.features, "A .dftf file or features.json");
  score_c->add_option("--out", score_o.out, "Output report (JSON lines)");

  EvalOpts eval_o;
  auto* eval_c = app.add_subcommand("eval", "Run one experiment and write a metrics report");
  eval_c->add_option("--config", eval_o.config, "Run configuration (JSON)");
  eval_c->add_option("--features", eval_o.features, "Use precomputed features.json");
  eval_c->add_option("--dataset", eval_o.dataset, "Use an on-disk dataset manifest.json");
  eval_c->add_option("--variant", eval_o.variant, "Detector variant");
  eval_c->add_option("--out", eval_o.out, "Output metrics JSON");

  SweepOpts sweep_o;
  auto* sweep_c = app.add_subcommand("sweep", "Evaluate over a parameter grid");
  sweep_c->add_option("--config", sweep_o.config, "Run configuration (JSON)");
  sweep_c->add_option("--kind", sweep_o.kind, "alpha_beta | lambda | snr | ood_holdout");
  sweep_c->add_option("--grid", sweep_o.grid, "Grid points, or 'default'");
  sweep_c->add_option("--out", sweep_o.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ConversionError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (*synth_c) run_synth(synth_o);
    else if (*tfi_c) run_tfi(tfi_o);
    else if (*ext_c) run_extract(ext_o);
    else if (*cal_c) run_calibrate(cal_o);
    else if (*score_c) run_score(score_o);
    else if (*eval_c) run_eval(eval_o);
    else if (*sweep_c) run_sweep(sweep_o);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << category(ex) << ": " << one_line(ex.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rfood
