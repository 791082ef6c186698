#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "keyscope/error.hpp"

namespace keyscope::nn {

/// Extents of a 4-D tensor: batch, channels, height (frequency), width (time).
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(w);
  }
  int spatial() const { return h * w; }
  bool operator==(const Shape&) const = default;

  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " + std::to_string(w) +
           ")";
  }
};

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowMatrixMap = Eigen::Map<RowMatrix<Scalar>>;

template <typename Scalar>
using ConstRowMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;

/// Dense row-major 4-D tensor. Storage is an Eigen array so elementwise
/// expressions compose directly on `array()`.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;

  explicit Tensor(const Shape& shape) : shape_(shape) {
    if (shape.n < 1 || shape.c < 1 || shape.h < 1 || shape.w < 1) {
      throw ShapeError("tensor extents must be >= 1, got " + shape.str());
    }
    data_ = Array::Zero(static_cast<Eigen::Index>(shape.size()));
  }

  Tensor(const Shape& shape, Scalar fill) : Tensor(shape) { data_.setConstant(fill); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }
  bool empty() const { return data_.size() == 0; }

  Array& array() { return data_; }
  const Array& array() const { return data_; }
  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  std::size_t index(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  Scalar& operator()(int n, int c, int h, int w) { return data_[static_cast<Eigen::Index>(index(n, c, h, w))]; }
  Scalar operator()(int n, int c, int h, int w) const {
    return data_[static_cast<Eigen::Index>(index(n, c, h, w))];
  }

  /// Sample `n` viewed as a (channels x height*width) matrix.
  RowMatrixMap<Scalar> sample(int n) {
    return RowMatrixMap<Scalar>(data() + static_cast<std::size_t>(n) * per_sample(), shape_.c, shape_.spatial());
  }
  ConstRowMatrixMap<Scalar> sample(int n) const {
    return ConstRowMatrixMap<Scalar>(data() + static_cast<std::size_t>(n) * per_sample(), shape_.c,
                                     shape_.spatial());
  }

  /// One feature map (n, c) as a flat array over height*width.
  Eigen::Map<Array> channel(int n, int c) {
    return Eigen::Map<Array>(data() + index(n, c, 0, 0), shape_.spatial());
  }
  Eigen::Map<const Array> channel(int n, int c) const {
    return Eigen::Map<const Array>(data() + index(n, c, 0, 0), shape_.spatial());
  }

  std::size_t per_sample() const { return static_cast<std::size_t>(shape_.c) * shape_.spatial(); }
  std::size_t bytes() const { return size() * sizeof(Scalar); }

  void set_zero() { data_.setZero(); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape_);
    out.array() = data_.template cast<Other>();
    return out;
  }

 private:
  Shape shape_{};
  Array data_;
};

/// Trainable tensor with its gradient accumulator.
template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> value;
  Tensor<Scalar> grad;

  Parameter() = default;
  Parameter(std::string param_name, const Shape& shape)
      : name(std::move(param_name)), value(shape), grad(shape) {}

  std::size_t count() const { return value.size(); }
};

}  // namespace keyscope::nn
