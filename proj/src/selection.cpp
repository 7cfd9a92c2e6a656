// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/selection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfood/error.hpp"

namespace rfood {

namespace {

struct ClassGroups {
  std::vector<std::vector<const FeatureTensor*>> members;
  std::size_t channels = 0, height = 0, width = 0;
};

ClassGroups group_by_class(std::span<const FeatureTensor> train) {
  if (train.empty()) throw Error("selection: no training features");
  ClassGroups g;
  g.channels = train[0].channels();
  g.height = train[0].height();
  g.width = train[0].width();
  int max_label = -1;
  for (const auto& t : train) {
    if (t.label < 0) throw ProtocolError("selection: training feature without an ID label");
    if (!t.values.same_shape(train[0].values))
      throw DimensionError("selection: training features differ in shape");
    max_label = std::max(max_label, t.label);
  }
  g.members.resize(static_cast<std::size_t>(max_label) + 1);
  for (const auto& t : train) g.members[static_cast<std::size_t>(t.label)].push_back(&t);
  if (g.members.size() < 2)
    throw Error("selection: at least 2 classes are required for inter-class statistics");
  for (std::size_t c = 0; c < g.members.size(); ++c)
    if (g.members[c].empty())
      throw Error("selection: class " + std::to_string(c) + " has no samples");
  return g;
}

double scalar_similarity(double a, double b, double eps) {
  if (std::abs(a) < eps || std::abs(b) < eps) return 0.0;
  return (a * b) / (std::abs(a) * std::abs(b));
}

// Mean over ordered pairs p != q.
template <typename Sim>
double mean_pair_similarity(std::size_t n_cls, Sim sim) {
  double sum = 0.0;
  for (std::size_t p = 0; p < n_cls; ++p)
    for (std::size_t q = 0; q < n_cls; ++q)
      if (p != q) sum += sim(p, q);
  return sum / static_cast<double>(n_cls * (n_cls - 1));
}

// Population variance of per-class values around their unweighted mean.
double between_class_variance(std::span<const double> values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return var / static_cast<double>(values.size());
}

Tensor3 class_mean_tensor(const std::vector<const FeatureTensor*>& members) {
  const auto& first = members.front()->values;
  Tensor3 mean(first.channels(), first.height(), first.width());
  for (const auto* t : members) {
    const auto& d = t->values.data();
    for (std::size_t x = 0; x < d.size(); ++x) mean.data()[x] += d[x];
  }
  for (auto& v : mean.data()) v /= static_cast<double>(members.size());
  return mean;
}

}  // namespace

std::string_view to_string(SimMode mode) {
  return mode == SimMode::ScalarLiteral ? "scalar_literal" : "profile";
}

SimMode parse_sim_mode(std::string_view name) {
  if (name == "scalar_literal") return SimMode::ScalarLiteral;
  if (name == "profile") return SimMode::Profile;
  throw ConfigError("unknown sim mode '" + std::string(name) + "'");
}

std::string_view to_string(SelectionVariant v) {
  switch (v) {
    case SelectionVariant::Full: return "full";
    case SelectionVariant::SpatialOnly: return "spatial_only";
    case SelectionVariant::ChannelOnly: return "channel_only";
    case SelectionVariant::None: return "none";
  }
  return "unknown";
}

SelectionVariant parse_selection_variant(std::string_view name) {
  for (auto v : {SelectionVariant::Full, SelectionVariant::SpatialOnly,
                 SelectionVariant::ChannelOnly, SelectionVariant::None})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown selection variant '" + std::string(name) + "'");
}

void SelectionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("selection: alpha must be in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("selection: beta must be in [0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("selection: epsilon must be positive");
}

Matrix channel_average(const FeatureTensor& tensor) {
  const auto& v = tensor.values;
  Matrix m(v.height(), v.width());
  for (std::size_t k = 0; k < v.channels(); ++k) {
    const auto ch = v.channel(k);
    for (std::size_t p = 0; p < ch.size(); ++p) m.data()[p] += ch[p];
  }
  for (auto& x : m.data()) x /= static_cast<double>(v.channels());
  return m;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b, double eps) {
  if (a.size() != b.size()) throw DimensionError("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < eps || nb < eps) return 0.0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

SpatialStats compute_spatial_stats(std::span<const FeatureTensor> train,
                                   const SelectionConfig& config) {
  config.validate();
  const auto groups = group_by_class(train);
  const std::size_t n_cls = groups.members.size();
  const std::size_t h = groups.height, w = groups.width, c_s = groups.channels;

  SpatialStats stats;
  for (const auto& members : groups.members) {
    Matrix mu(h, w);
    for (const auto* t : members) {
      const Matrix m = channel_average(*t);
      for (std::size_t p = 0; p < m.size(); ++p) mu.data()[p] += m.data()[p];
    }
    for (auto& x : mu.data()) x /= static_cast<double>(members.size());
    stats.class_means.push_back(std::move(mu));
  }

  // Channel profiles per class and cell, only needed in Profile mode.
  std::vector<std::vector<std::vector<double>>> profiles;
  if (config.sim_mode == SimMode::Profile) {
    profiles.resize(n_cls);
    for (std::size_t c = 0; c < n_cls; ++c) {
      const Tensor3 mean = class_mean_tensor(groups.members[c]);
      profiles[c].assign(h * w, std::vector<double>(c_s));
      for (std::size_t k = 0; k < c_s; ++k)
        for (std::size_t p = 0; p < h * w; ++p) profiles[c][p][k] = mean.channel(k)[p];
    }
  }

  stats.similarity = Matrix(h, w);
  stats.variance = Matrix(h, w);
  std::vector<double> per_class(n_cls);
  for (std::size_t p = 0; p < h * w; ++p) {
    for (std::size_t c = 0; c < n_cls; ++c) per_class[c] = stats.class_means[c].data()[p];
    stats.variance.data()[p] = between_class_variance(per_class);
    stats.similarity.data()[p] = mean_pair_similarity(n_cls, [&](std::size_t a, std::size_t b) {
      if (config.sim_mode == SimMode::ScalarLiteral)
        return scalar_similarity(per_class[a], per_class[b], config.epsilon);
      return cosine_similarity(profiles[a][p], profiles[b][p], config.epsilon);
    });
  }
  return stats;
}

std::vector<double> shift_normalize(std::span<const double> scores, double eps) {
  if (scores.empty()) throw DimensionError("shift_normalize: empty input");
  const double lo = *std::min_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = scores[i] - lo + eps;
    sum += w[i];
  }
  for (auto& x : w) x /= sum;
  return w;
}

Matrix compute_spatial_weights(const SpatialStats& stats, const SelectionConfig& config) {
  config.validate();
  const auto& v = stats.variance;
  const auto& s = stats.similarity;
  if (v.rows() != s.rows() || v.cols() != s.cols())
    throw DimensionError("spatial stats: variance and similarity shapes differ");
  std::vector<double> score(v.size());
  for (std::size_t p = 0; p < v.size(); ++p)
    score[p] = (1.0 - config.alpha) * v.data()[p] - config.alpha * s.data()[p];
  return Matrix(v.rows(), v.cols(), shift_normalize(score, config.epsilon));
}

FeatureTensor apply_spatial(const FeatureTensor& tensor, const Matrix& weights) {
  const auto& v = tensor.values;
  if (weights.rows() != v.height() || weights.cols() != v.width())
    throw DimensionError("apply_spatial: weight map does not match feature spatial dims");
  FeatureTensor out = tensor;
  for (std::size_t k = 0; k < v.channels(); ++k) {
    auto ch = out.values.channel(k);
    for (std::size_t p = 0; p < ch.size(); ++p) ch[p] *= weights.data()[p];
  }
  return out;
}

ChannelStats compute_channel_stats(std::span<const FeatureTensor> train_spatially_weighted,
                                   const SelectionConfig& config) {
  config.validate();
  const auto groups = group_by_class(train_spatially_weighted);
  const std::size_t n_cls = groups.members.size();
  const std::size_t c_s = groups.channels;
  const std::size_t plane = groups.height * groups.width;

  ChannelStats stats;
  stats.class_means = Matrix(n_cls, c_s);
  for (std::size_t c = 0; c < n_cls; ++c) {
    for (const auto* t : groups.members[c])
      for (std::size_t k = 0; k < c_s; ++k) {
        double s = 0.0;
        for (double x : t->values.channel(k)) s += x;
        stats.class_means(c, k) += s / static_cast<double>(plane);
      }
    for (std::size_t k = 0; k < c_s; ++k)
      stats.class_means(c, k) /= static_cast<double>(groups.members[c].size());
  }

  std::vector<Tensor3> mean_maps;
  if (config.sim_mode == SimMode::Profile)
    for (const auto& members : groups.members) mean_maps.push_back(class_mean_tensor(members));

  stats.similarity.resize(c_s);
  stats.variance.resize(c_s);
  std::vector<double> per_class(n_cls);
  for (std::size_t k = 0; k < c_s; ++k) {
    for (std::size_t c = 0; c < n_cls; ++c) per_class[c] = stats.class_means(c, k);
    stats.variance[k] = between_class_variance(per_class);
    stats.similarity[k] = mean_pair_similarity(n_cls, [&](std::size_t a, std::size_t b) {
      if (config.sim_mode == SimMode::ScalarLiteral)
        return scalar_similarity(per_class[a], per_class[b], config.epsilon);
      return cosine_similarity(mean_maps[a].channel(k), mean_maps[b].channel(k), config.epsilon);
    });
  }
  return stats;
}

std::vector<double> compute_channel_weights(const ChannelStats& stats,
                                            const SelectionConfig& config) {
  config.validate();
  if (stats.variance.size() != stats.similarity.size())
    throw DimensionError("channel stats: variance and similarity lengths differ");
  std::vector<double> score(stats.variance.size());
  for (std::size_t k = 0; k < score.size(); ++k)
    score[k] = (1.0 - config.beta) * stats.variance[k] - config.beta * stats.similarity[k];
  return shift_normalize(score, config.epsilon);
}

FeatureTensor apply_channel(const FeatureTensor& tensor, std::span<const double> weights) {
  if (weights.size() != tensor.channels())
    throw DimensionError("apply_channel: weight vector does not match channel count");
  FeatureTensor out = tensor;
  for (std::size_t k = 0; k < tensor.channels(); ++k)
    for (auto& x : out.values.channel(k)) x *= weights[k];
  return out;
}

std::vector<double> pool(const FeatureTensor& tensor) {
  const auto& v = tensor.values;
  std::vector<double> g(v.channels(), 0.0);
  for (std::size_t k = 0; k < v.channels(); ++k) {
    for (double x : v.channel(k)) g[k] += x;
    g[k] /= static_cast<double>(v.plane_size());
  }
  return g;
}

Matrix uniform_spatial_weights(std::size_t height, std::size_t width) {
  return Matrix(height, width, 1.0 / static_cast<double>(height * width));
}

std::vector<double> uniform_channel_weights(std::size_t channels) {
  return std::vector<double>(channels, 1.0 / static_cast<double>(channels));
}

SelectionFit fit_selection(std::span<const FeatureTensor> train, const SelectionConfig& config,
                           SelectionVariant variant) {
  config.validate();
  if (train.empty()) throw Error("selection: no training features");
  const auto& shape = train[0].values;
  SelectionFit fit;
  const bool spatial = variant == SelectionVariant::Full || variant == SelectionVariant::SpatialOnly;
  const bool channel = variant == SelectionVariant::Full || variant == SelectionVariant::ChannelOnly;

  if (spatial) {
    fit.spatial = compute_spatial_stats(train, config);
    fit.weights.spatial = compute_spatial_weights(fit.spatial, config);
  } else {
    fit.weights.spatial = uniform_spatial_weights(shape.height(), shape.width());
  }

  if (channel) {
    std::vector<FeatureTensor> weighted;
    weighted.reserve(train.size());
    for (const auto& t : train) weighted.push_back(apply_spatial(t, fit.weights.spatial));
    fit.channel = compute_channel_stats(weighted, config);
    fit.weights.channel = compute_channel_weights(fit.channel, config);
  } else {
    // Still validates labels and shapes.
    (void)group_by_class(train);
    fit.weights.channel = uniform_channel_weights(shape.channels());
  }
  return fit;
}

std::vector<double> select_and_pool(const FeatureTensor& tensor, const SelectionWeights& weights) {
  return pool(apply_channel(apply_spatial(tensor, weights.spatial), weights.channel));
}

}  // namespace rfood
