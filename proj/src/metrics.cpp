// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "rfood/error.hpp"

namespace rfood {

BinaryMetrics binary_metrics(std::span<const LabeledScore> scores, double gamma,
                             bool id_positive) {
  if (scores.empty()) throw Error("binary_metrics: no scores");
  BinaryMetrics m;
  auto& c = m.counts;
  for (const auto& s : scores) {
    const bool predicted_id = s.score >= gamma;
    const bool actual_pos = id_positive ? s.is_id : !s.is_id;
    const bool predicted_pos = id_positive ? predicted_id : !predicted_id;
    if (actual_pos && predicted_pos) ++c.tp;
    else if (!actual_pos && predicted_pos) ++c.fp;
    else if (!actual_pos) ++c.tn;
    else ++c.fn;
  }
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  m.accuracy = d(c.tp + c.tn) / d(c.total());
  m.recall = c.tp + c.fn > 0 ? d(c.tp) / d(c.tp + c.fn) : 0.0;
  const double precision = c.tp + c.fp > 0 ? d(c.tp) / d(c.tp + c.fp) : 0.0;
  m.f1 = precision + m.recall > 0.0 ? 2.0 * precision * m.recall / (precision + m.recall) : 0.0;
  return m;
}

double auroc(std::span<const LabeledScore> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });
  double id_rank_sum = 0.0;
  std::size_t n_id = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
    // 1-based ranks i+1..j share their average.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (scores[order[t]].is_id) {
        id_rank_sum += avg_rank;
        ++n_id;
      }
    i = j;
  }
  const std::size_t n_ood = scores.size() - n_id;
  if (n_id == 0 || n_ood == 0) throw Error("auroc: both ID and OOD scores are required");
  const double nid = static_cast<double>(n_id);
  const double u = id_rank_sum - nid * (nid + 1.0) / 2.0;
  return u / (nid * static_cast<double>(n_ood));
}

double wem(double accuracy, double f1, double recall, double auroc) {
  return (accuracy + f1 + recall + auroc) / 4.0;
}

MetricsReport make_report(std::span<const LabeledScore> scores, double gamma, bool id_positive) {
  const auto b = binary_metrics(scores, gamma, id_positive);
  MetricsReport r;
  r.accuracy = b.accuracy;
  r.recall = b.recall;
  r.f1 = b.f1;
  r.counts = b.counts;
  r.auroc = auroc(scores);
  r.wem = wem(r.accuracy, r.f1, r.recall, r.auroc);
  r.gamma = gamma;
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"accuracy", r.accuracy},
          {"recall", r.recall},
          {"f1", r.f1},
          {"auroc", r.auroc},
          {"wem", r.wem},
          {"closed_set_accuracy", r.closed_set_accuracy},
          {"gamma", r.gamma},
          {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn},
                      {"fn", r.counts.fn}}}};
}

}  // namespace rfood
