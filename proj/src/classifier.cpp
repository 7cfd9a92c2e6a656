// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfood/error.hpp"

namespace rfood {

namespace {

std::size_t class_count(std::span<const int> labels) {
  int max_label = -1;
  for (int y : labels) {
    if (y < 0) throw Error("train_head: negative label " + std::to_string(y));
    max_label = std::max(max_label, y);
  }
  return static_cast<std::size_t>(max_label + 1);
}

void check_data(const Matrix& x, std::span<const int> labels) {
  if (x.rows() != labels.size()) throw DimensionError("training data: rows != labels");
  if (x.rows() == 0) throw Error("training data is empty");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error("training data contains non-finite values");
}

void softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : z) v /= sum;
}

}  // namespace

std::vector<double> logits(const LinearHead& head, std::span<const double> g) {
  if (g.size() != head.inputs() || head.bias.size() != head.classes())
    throw DimensionError("logits: feature length " + std::to_string(g.size()) +
                         " does not match head input " + std::to_string(head.inputs()));
  std::vector<double> z(head.classes());
  for (std::size_t j = 0; j < z.size(); ++j) {
    double acc = head.bias[j];
    const auto row = head.weights.row(j);
    for (std::size_t d = 0; d < g.size(); ++d) acc += row[d] * g[d];
    z[j] = acc;
  }
  return z;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(l2 >= 0.0)) throw ConfigError("train: l2 must be nonnegative");
}

double softmax_cross_entropy(std::span<const double> z, std::size_t label) {
  if (label >= z.size()) throw DimensionError("softmax_cross_entropy: label out of range");
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum) - z[label];
}

double training_loss(const LinearHead& head, const Matrix& x, std::span<const int> labels,
                     double l2) {
  check_data(x, labels);
  double loss = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n)
    loss += softmax_cross_entropy(logits(head, x.row(n)), static_cast<std::size_t>(labels[n]));
  loss /= static_cast<double>(x.rows());
  double norm2 = 0.0;
  for (double w : head.weights.data()) norm2 += w * w;
  return loss + 0.5 * l2 * norm2;
}

LinearHead training_gradient(const LinearHead& head, const Matrix& x,
                             std::span<const int> labels, double l2) {
  check_data(x, labels);
  LinearHead grad{Matrix(head.classes(), head.inputs()), std::vector<double>(head.classes())};
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    auto p = logits(head, x.row(n));
    softmax_inplace(p);
    p[static_cast<std::size_t>(labels[n])] -= 1.0;
    const auto g = x.row(n);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double r = p[j] * inv_n;
      grad.bias[j] += r;
      auto row = grad.weights.row(j);
      for (std::size_t d = 0; d < g.size(); ++d) row[d] += r * g[d];
    }
  }
  for (std::size_t i = 0; i < grad.weights.size(); ++i)
    grad.weights.data()[i] += l2 * head.weights.data()[i];
  return grad;
}

double classification_accuracy(const LinearHead& head, const Matrix& x,
                               std::span<const int> labels) {
  check_data(x, labels);
  std::size_t correct = 0;
  for (std::size_t n = 0; n < x.rows(); ++n)
    if (static_cast<int>(argmax(logits(head, x.row(n)))) == labels[n]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

TrainResult train_head(const Matrix& pooled, std::span<const int> labels,
                       const TrainConfig& config) {
  config.validate();
  check_data(pooled, labels);
  const std::size_t n_cls = class_count(labels);
  if (n_cls < 2) throw Error("train_head: at least 2 classes are required");
  std::vector<std::size_t> counts(n_cls, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  for (std::size_t c = 0; c < n_cls; ++c)
    if (counts[c] == 0) throw Error("train_head: class " + std::to_string(c) + " has no samples");

  const std::size_t n = pooled.rows();
  const std::size_t dim = pooled.cols();
  std::vector<double> mean(dim, 0.0), scale(dim, 1.0);
  Matrix x = pooled;
  if (config.standardize) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t d = 0; d < dim; ++d) mean[d] += pooled(r, d);
    for (auto& m : mean) m /= static_cast<double>(n);
    std::vector<double> var(dim, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t d = 0; d < dim; ++d) {
        const double e = pooled(r, d) - mean[d];
        var[d] += e * e;
      }
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(var[d] / static_cast<double>(n));
      // Constant features are centred but not rescaled.
      scale[d] = sd > 1e-12 * (1.0 + std::abs(mean[d])) ? sd : 1.0;
    }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t d = 0; d < dim; ++d) x(r, d) = (pooled(r, d) - mean[d]) / scale[d];
  }

  TrainResult result;
  LinearHead head{Matrix(n_cls, dim), std::vector<double>(n_cls, 0.0)};
  result.loss_trace.reserve(config.epochs + 1);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    result.loss_trace.push_back(training_loss(head, x, labels, config.l2));
    const LinearHead grad = training_gradient(head, x, labels, config.l2);
    for (std::size_t i = 0; i < head.weights.size(); ++i)
      head.weights.data()[i] -= config.learning_rate * grad.weights.data()[i];
    for (std::size_t j = 0; j < n_cls; ++j) head.bias[j] -= config.learning_rate * grad.bias[j];
  }
  result.final_loss = training_loss(head, x, labels, config.l2);
  result.loss_trace.push_back(result.final_loss);
  result.final_accuracy = classification_accuracy(head, x, labels);

  if (config.standardize) {
    // W (g - mean) / scale + b  ==  (W / scale) g + (b - W (mean / scale)).
    for (std::size_t j = 0; j < n_cls; ++j) {
      auto row = head.weights.row(j);
      for (std::size_t d = 0; d < dim; ++d) {
        row[d] /= scale[d];
        head.bias[j] -= row[d] * mean[d];
      }
    }
  }
  result.head = std::move(head);
  return result;
}

}  // namespace rfood
