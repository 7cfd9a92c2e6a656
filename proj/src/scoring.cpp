// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfood/error.hpp"

namespace rfood {

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    p[j] = std::exp(z[j] - m);
    sum += p[j];
  }
  for (auto& v : p) v /= sum;
  return p;
}

double round_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void round_f32(std::vector<double>& v) {
  for (auto& x : v) x = round_f32(x);
}

}  // namespace

double energy_score(std::span<const double> z) {
  if (z.empty()) throw DimensionError("energy_score: empty logits");
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

double max_softmax_score(std::span<const double> z) {
  if (z.empty()) throw DimensionError("max_softmax_score: empty logits");
  const auto p = softmax(z);
  return *std::max_element(p.begin(), p.end());
}

std::string_view to_string(GradMode mode) {
  return mode == GradMode::MaxLogitLiteral ? "max_logit" : "energy_grad";
}

GradMode parse_grad_mode(std::string_view name) {
  if (name == "max_logit") return GradMode::MaxLogitLiteral;
  if (name == "energy_grad") return GradMode::EnergyGrad;
  throw ConfigError("unknown grad mode '" + std::string(name) + "'");
}

double gradient_norm(const LinearHead& head, std::span<const double> g, GradMode mode) {
  const auto z = logits(head, g);
  if (mode == GradMode::MaxLogitLiteral) {
    double sum = 0.0;
    for (double w : head.weights.row(argmax(z))) sum += w * w;
    return std::sqrt(sum);
  }
  const auto p = softmax(z);
  double sum = 0.0;
  for (std::size_t d = 0; d < head.inputs(); ++d) {
    double acc = 0.0;
    for (std::size_t j = 0; j < head.classes(); ++j) acc += head.weights(j, d) * p[j];
    sum += acc * acc;
  }
  return std::sqrt(sum);
}

ScoreNormalizer fit_normalizer(std::span<const ScorePair> val_id_scores) {
  if (val_id_scores.size() < 2)
    throw Error("fit_normalizer: at least 2 validation scores are required, got " +
                std::to_string(val_id_scores.size()));
  const double n = static_cast<double>(val_id_scores.size());
  ScoreNormalizer out;
  double me = 0.0, mg = 0.0;
  for (const auto& s : val_id_scores) {
    me += s.energy;
    mg += s.grad;
  }
  me /= n;
  mg /= n;
  double ve = 0.0, vg = 0.0;
  for (const auto& s : val_id_scores) {
    ve += (s.energy - me) * (s.energy - me);
    vg += (s.grad - mg) * (s.grad - mg);
  }
  out.mu_energy = me;
  out.mu_grad = mg;
  out.sigma_energy = std::max(std::sqrt(ve / n), ScoreNormalizer::kSigmaFloor);
  out.sigma_grad = std::max(std::sqrt(vg / n), ScoreNormalizer::kSigmaFloor);
  return out;
}

void FusionConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("fusion: lambda must be in [0, 1]");
}

double fused_score(double s_energy, double g_norm, const ScoreNormalizer& normalizer,
                   const FusionConfig& fusion) {
  return fusion.lambda * normalizer.energy_z(s_energy) -
         (1.0 - fusion.lambda) * normalizer.grad_z(g_norm);
}

double calibrate_threshold(std::span<const double> val_id_scores, double retention) {
  if (val_id_scores.empty()) throw Error("calibrate_threshold: no validation scores");
  if (!(retention > 0.0 && retention < 1.0))
    throw ConfigError("calibrate_threshold: retention must be in (0, 1)");
  std::vector<double> s(val_id_scores.begin(), val_id_scores.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const double pos = (1.0 - retention) * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  double gamma = s[lo] + frac * (s[hi] - s[lo]);
  const auto keep = static_cast<std::size_t>(
      std::ceil(retention * static_cast<double>(n) - 1e-9));
  gamma = std::min(gamma, s[n - std::max<std::size_t>(keep, 1)]);
  return gamma;
}

std::string_view to_string(Decision d) { return d == Decision::ID ? "ID" : "OOD"; }

std::string_view to_string(ScoreMode mode) {
  return mode == ScoreMode::Fused ? "fused" : "max_softmax";
}

ScoreMode parse_score_mode(std::string_view name) {
  if (name == "fused") return ScoreMode::Fused;
  if (name == "max_softmax") return ScoreMode::MaxSoftmax;
  throw ConfigError("unknown score mode '" + std::string(name) + "'");
}

nlohmann::json to_json(const ScoreReport& report) {
  nlohmann::json j;
  j["s_energy"] = report.s_energy;
  j["g_norm"] = report.g_norm;
  j["s_fused"] = report.s_fused;
  j["decision"] = to_string(report.decision);
  j["predicted_class"] = report.predicted_class;
  return j;
}

RawScores raw_scores(const CalibrationArtifact& artifact, const FeatureTensor& features) {
  if (!artifact.fitted) throw Error("score: artifact is not fitted");
  if (features.channels() != artifact.channels || features.height() != artifact.height ||
      features.width() != artifact.width)
    throw DimensionError("score: feature dims " + std::to_string(features.channels()) + "x" +
                         std::to_string(features.height()) + "x" +
                         std::to_string(features.width()) + " do not match artifact dims " +
                         std::to_string(artifact.channels) + "x" +
                         std::to_string(artifact.height) + "x" + std::to_string(artifact.width));
  const auto g = select_and_pool(features, artifact.weights);
  RawScores out;
  out.logits = logits(artifact.head, g);
  out.energy = energy_score(out.logits);
  out.grad = gradient_norm(artifact.head, g, artifact.fusion.grad_mode);
  return out;
}

ScoreReport score_sample(const CalibrationArtifact& artifact, const FeatureTensor& features) {
  const auto raw = raw_scores(artifact, features);
  ScoreReport r;
  r.s_energy = raw.energy;
  r.g_norm = raw.grad;
  r.s_fused = artifact.score_mode == ScoreMode::Fused
                  ? fused_score(raw.energy, raw.grad, artifact.normalizer, artifact.fusion)
                  : max_softmax_score(raw.logits);
  r.decision = decide(r.s_fused, artifact.gamma);
  r.predicted_class = argmax(raw.logits);
  return r;
}

Calibration calibrate(std::span<const FeatureTensor> train, std::span<const FeatureTensor> val,
                      const CalibrationConfig& config) {
  config.selection.validate();
  config.train.validate();
  config.fusion.validate();
  if (!(config.retention > 0.0 && config.retention < 1.0))
    throw ConfigError("calibrate: retention must be in (0, 1)");
  if (train.empty()) throw Error("calibrate: empty training set");

  Calibration out;
  auto& a = out.artifact;
  a.channels = train[0].channels();
  a.height = train[0].height();
  a.width = train[0].width();
  a.selection = config.selection;
  a.variant = config.variant;
  a.train = config.train;
  a.fusion = config.fusion;
  a.score_mode = config.score_mode;
  a.retention = config.retention;
  a.seeds = config.seeds;

  auto fit = fit_selection(train, config.selection, config.variant);
  a.weights = std::move(fit.weights);
  round_f32(a.weights.spatial.data());
  round_f32(a.weights.channel);
  for (auto& m : fit.spatial.class_means) round_f32(m.data());
  a.spatial_class_means = std::move(fit.spatial.class_means);
  a.channel_class_means = std::move(fit.channel.class_means);
  round_f32(a.channel_class_means.data());

  Matrix pooled(train.size(), a.channels);
  std::vector<int> labels(train.size());
  for (std::size_t n = 0; n < train.size(); ++n) {
    const auto g = select_and_pool(train[n], a.weights);
    std::copy(g.begin(), g.end(), pooled.row(n).begin());
    labels[n] = train[n].label;
  }
  auto trained = train_head(pooled, labels, config.train);
  a.head = std::move(trained.head);
  round_f32(a.head.weights.data());
  round_f32(a.head.bias);
  out.train_loss = trained.final_loss;
  out.train_accuracy = trained.final_accuracy;
  a.fitted = true;

  std::vector<ScorePair> pairs;
  std::vector<std::vector<double>> val_logits;
  for (const auto& t : val) {
    if (t.label < 0) continue;
    auto raw = raw_scores(a, t);
    pairs.push_back({raw.energy, raw.grad});
    val_logits.push_back(std::move(raw.logits));
  }
  if (pairs.empty()) throw Error("calibrate: validation split has no ID samples");
  a.normalizer = fit_normalizer(pairs);
  std::vector<double> stat(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    stat[i] = a.score_mode == ScoreMode::Fused
                  ? fused_score(pairs[i].energy, pairs[i].grad, a.normalizer, a.fusion)
                  : max_softmax_score(val_logits[i]);
  a.gamma = calibrate_threshold(stat, config.retention);
  return out;
}

}  // namespace rfood
