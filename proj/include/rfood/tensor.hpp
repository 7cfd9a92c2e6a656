// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rfood {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Channel-major C x H x W tensor. Used for images (C = 3) and feature maps.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
      : channels_(channels), height_(height), width_(width),
        data_(channels * height * width, fill) {}
  Tensor3(std::size_t channels, std::size_t height, std::size_t width,
          std::vector<double> data);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane_size() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t k, std::size_t i, std::size_t j) {
    return data_[(k * height_ + i) * width_ + j];
  }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[(k * height_ + i) * width_ + j];
  }

  std::span<double> channel(std::size_t k) {
    return {data_.data() + k * plane_size(), plane_size()};
  }
  std::span<const double> channel(std::size_t k) const {
    return {data_.data() + k * plane_size(), plane_size()};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor3& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

// Index of the largest element; ties resolve to the smallest index.
std::size_t argmax(std::span<const double> values);

}  // namespace rfood
