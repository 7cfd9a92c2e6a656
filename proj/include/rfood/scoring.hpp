// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rfood/classifier.hpp"
#include "rfood/features.hpp"
#include "rfood/selection.hpp"

namespace rfood {

// log sum_j exp(z_j), max-shifted.
double energy_score(std::span<const double> z);

// max_j softmax(z)_j.
double max_softmax_score(std::span<const double> z);

// MaxLogitLiteral: |d max_j z_j / d g|_2, which under z = W g + b is the norm
//   of the winning row of W.
// EnergyGrad: |d energy / d g|_2 = |W^T softmax(z)|_2.
enum class GradMode { MaxLogitLiteral, EnergyGrad };

std::string_view to_string(GradMode mode);
GradMode parse_grad_mode(std::string_view name);

double gradient_norm(const LinearHead& head, std::span<const double> g, GradMode mode);

struct ScorePair {
  double energy = 0.0;
  double grad = 0.0;
};

// z-score statistics fitted on ID validation scores.
struct ScoreNormalizer {
  static constexpr double kSigmaFloor = 1e-9;

  double mu_energy = 0.0;
  double sigma_energy = 1.0;
  double mu_grad = 0.0;
  double sigma_grad = 1.0;

  double energy_z(double s) const { return (s - mu_energy) / sigma_energy; }
  double grad_z(double g) const { return (g - mu_grad) / sigma_grad; }
};

// Mean and population standard deviation of each component.
ScoreNormalizer fit_normalizer(std::span<const ScorePair> val_id_scores);

struct FusionConfig {
  double lambda = 0.2;
  GradMode grad_mode = GradMode::MaxLogitLiteral;

  void validate() const;
};

// lambda N(s_energy) - (1 - lambda) N(g_norm).
double fused_score(double s_energy, double g_norm, const ScoreNormalizer& normalizer,
                   const FusionConfig& fusion);

// Linearly interpolated (1 - retention) quantile of the ID validation scores,
// lowered when necessary so that at least ceil(retention * n) of them are
// >= gamma. Retention must lie in the open interval (0, 1).
double calibrate_threshold(std::span<const double> val_id_scores, double retention = 0.95);

enum class Decision { ID, OOD };

std::string_view to_string(Decision d);

// ID iff score >= gamma.
inline Decision decide(double score, double gamma) {
  return score >= gamma ? Decision::ID : Decision::OOD;
}

// Which statistic the threshold is applied to.
enum class ScoreMode { Fused, MaxSoftmax };

std::string_view to_string(ScoreMode mode);
ScoreMode parse_score_mode(std::string_view name);

struct ScoreReport {
  double s_energy = 0.0;
  double g_norm = 0.0;
  // The thresholded statistic: fused score, or max softmax in MaxSoftmax mode.
  double s_fused = 0.0;
  Decision decision = Decision::OOD;
  std::size_t predicted_class = 0;
};

nlohmann::json to_json(const ScoreReport& report);

inline constexpr std::uint32_t kArtifactVersion = 1;

// Everything needed to score a feature tensor. Learned arrays are held at
// float precision, exactly as stored on disk.
struct CalibrationArtifact {
  std::uint32_t version = kArtifactVersion;
  std::size_t channels = 0, height = 0, width = 0;
  SelectionConfig selection;
  SelectionVariant variant = SelectionVariant::Full;
  SelectionWeights weights;
  std::vector<Matrix> spatial_class_means;  // empty unless the spatial stage ran
  Matrix channel_class_means;               // empty unless the channel stage ran
  TrainConfig train;
  LinearHead head;
  ScoreMode score_mode = ScoreMode::Fused;
  FusionConfig fusion;
  ScoreNormalizer normalizer;
  double retention = 0.95;
  double gamma = 0.0;
  nlohmann::json seeds = nlohmann::json::object();
  bool fitted = false;
};

struct CalibrationConfig {
  SelectionConfig selection;
  SelectionVariant variant = SelectionVariant::Full;
  TrainConfig train;
  FusionConfig fusion;
  ScoreMode score_mode = ScoreMode::Fused;
  double retention = 0.95;
  nlohmann::json seeds = nlohmann::json::object();
};

struct Calibration {
  CalibrationArtifact artifact;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
};

// Fits selection and head on `train`, then normalizer and threshold on the ID
// samples of `val`.
Calibration calibrate(std::span<const FeatureTensor> train, std::span<const FeatureTensor> val,
                      const CalibrationConfig& config);

// Energy, gradient norm and max-logit class of a pooled vector.
struct RawScores {
  std::vector<double> logits;
  double energy = 0.0;
  double grad = 0.0;
};
RawScores raw_scores(const CalibrationArtifact& artifact, const FeatureTensor& features);

ScoreReport score_sample(const CalibrationArtifact& artifact, const FeatureTensor& features);

std::string encode_artifact(const CalibrationArtifact& artifact);
CalibrationArtifact decode_artifact(std::string_view bytes);
void write_artifact(const CalibrationArtifact& artifact, const std::filesystem::path& path);
CalibrationArtifact read_artifact(const std::filesystem::path& path);

}  // namespace rfood
