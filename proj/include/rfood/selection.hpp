// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rfood/features.hpp"
#include "rfood/tensor.hpp"

namespace rfood {

// How inter-class similarity of two class statistics is measured.
//   ScalarLiteral: cosine of two scalars, i.e. sign(a * b) (0 if either is
//                  below epsilon in magnitude).
//   Profile:       cosine between the two classes' mean profiles: the C-dim
//                  channel profile at a spatial cell, or the H*W spatial map
//                  of a channel.
enum class SimMode { ScalarLiteral, Profile };

std::string_view to_string(SimMode mode);
SimMode parse_sim_mode(std::string_view name);

struct SelectionConfig {
  double alpha = 0.1;  // spatial: weight of similarity against variance
  double beta = 0.2;   // channel: same trade-off
  SimMode sim_mode = SimMode::Profile;
  double epsilon = 1e-12;

  void validate() const;
};

// Which selection stages are fitted; skipped stages get uniform weights.
enum class SelectionVariant { Full, SpatialOnly, ChannelOnly, None };

std::string_view to_string(SelectionVariant v);
SelectionVariant parse_selection_variant(std::string_view name);

struct SpatialStats {
  std::vector<Matrix> class_means;  // per class, H x W mean of channel averages
  Matrix similarity;                // H x W, in [-1, 1]
  Matrix variance;                  // H x W, >= 0
};

struct ChannelStats {
  Matrix class_means;               // N_cls x C
  std::vector<double> similarity;   // C
  std::vector<double> variance;     // C
};

struct SelectionWeights {
  Matrix spatial;               // H x W, sums to 1
  std::vector<double> channel;  // C, sums to 1
};

struct SelectionFit {
  SelectionWeights weights;
  SpatialStats spatial;  // empty when the spatial stage is skipped
  ChannelStats channel;  // empty when the channel stage is skipped
};

// Mean over channels: H x W.
Matrix channel_average(const FeatureTensor& tensor);

// Cosine similarity; 0 when either vector has norm below eps.
double cosine_similarity(std::span<const double> a, std::span<const double> b, double eps);

// Requires labels 0..N_cls-1 with N_cls >= 2 and every class nonempty.
SpatialStats compute_spatial_stats(std::span<const FeatureTensor> train,
                                   const SelectionConfig& config);

// (v - min v + eps) / sum(v - min v + eps): nonnegative, sums to 1, keeps order.
std::vector<double> shift_normalize(std::span<const double> scores, double eps);

Matrix compute_spatial_weights(const SpatialStats& stats, const SelectionConfig& config);

FeatureTensor apply_spatial(const FeatureTensor& tensor, const Matrix& weights);

// Expects spatially weighted training features.
ChannelStats compute_channel_stats(std::span<const FeatureTensor> train_spatially_weighted,
                                   const SelectionConfig& config);

std::vector<double> compute_channel_weights(const ChannelStats& stats,
                                            const SelectionConfig& config);

FeatureTensor apply_channel(const FeatureTensor& tensor, std::span<const double> weights);

// Global average pooling: C-vector.
std::vector<double> pool(const FeatureTensor& tensor);

Matrix uniform_spatial_weights(std::size_t height, std::size_t width);
std::vector<double> uniform_channel_weights(std::size_t channels);

// Spatial stats on raw features, spatial weights, channel stats on the
// spatially weighted features, channel weights.
SelectionFit fit_selection(std::span<const FeatureTensor> train, const SelectionConfig& config,
                           SelectionVariant variant = SelectionVariant::Full);

// pool(apply_channel(apply_spatial(tensor))).
std::vector<double> select_and_pool(const FeatureTensor& tensor, const SelectionWeights& weights);

}  // namespace rfood
