// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rfood/tensor.hpp"

namespace rfood {

// z = W g + b with W of shape N_cls x C.
struct LinearHead {
  Matrix weights;
  std::vector<double> bias;

  std::size_t classes() const { return weights.rows(); }
  std::size_t inputs() const { return weights.cols(); }
};

std::vector<double> logits(const LinearHead& head, std::span<const double> g);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;  // recorded only; training is deterministic
  // Train on per-feature z-scored inputs and fold the affine map back into
  // the head afterwards. The returned head always acts on raw inputs.
  bool standardize = true;

  void validate() const;
};

struct TrainResult {
  LinearHead head;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  std::vector<double> loss_trace;  // loss before each update, then final loss
};

// -log softmax(z)[label], via log-sum-exp.
double softmax_cross_entropy(std::span<const double> z, std::size_t label);

// Mean cross-entropy over rows of `x` plus (l2 / 2) |W|^2; the bias is not
// penalized.
double training_loss(const LinearHead& head, const Matrix& x, std::span<const int> labels,
                     double l2);

// Gradient of training_loss with respect to (W, b), returned as a head.
LinearHead training_gradient(const LinearHead& head, const Matrix& x,
                             std::span<const int> labels, double l2);

// Full-batch gradient descent from zero initialization for a fixed number of
// epochs. Rows of `pooled` are samples; labels must cover 0..N_cls-1, N_cls >= 2.
TrainResult train_head(const Matrix& pooled, std::span<const int> labels,
                       const TrainConfig& config);

double classification_accuracy(const LinearHead& head, const Matrix& x,
                               std::span<const int> labels);

}  // namespace rfood
