// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>

#include "json.hpp"

namespace rfood {

struct LabeledScore {
  double score = 0.0;
  bool is_id = true;
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

struct BinaryMetrics {
  double accuracy = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
};

// A sample is predicted ID iff score >= gamma. With id_positive the ID class
// is the positive class; otherwise OOD is.
BinaryMetrics binary_metrics(std::span<const LabeledScore> scores, double gamma,
                             bool id_positive = true);

// Probability that a random ID sample outscores a random OOD sample, ties
// counting one half. Computed from average ranks.
double auroc(std::span<const LabeledScore> scores);

double wem(double accuracy, double f1, double recall, double auroc);

struct MetricsReport {
  double accuracy = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auroc = 0.0;
  double wem = 0.0;
  ConfusionCounts counts;
  // Closed-set classification accuracy on the ID test samples.
  double closed_set_accuracy = 0.0;
  double gamma = 0.0;
};

MetricsReport make_report(std::span<const LabeledScore> scores, double gamma,
                          bool id_positive = true);

nlohmann::json to_json(const MetricsReport& report);

}  // namespace rfood
