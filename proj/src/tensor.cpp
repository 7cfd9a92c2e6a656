// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/tensor.hpp"

#include "rfood/error.hpp"

namespace rfood {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw DimensionError("matrix data size mismatch");
}

Tensor3::Tensor3(std::size_t channels, std::size_t height, std::size_t width,
                 std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != channels_ * height_ * width_)
    throw DimensionError("tensor data size mismatch");
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace rfood
