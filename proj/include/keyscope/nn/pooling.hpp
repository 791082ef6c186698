#pragma once

#include <string>
#include <vector>

#include "keyscope/nn/layer.hpp"

namespace keyscope::nn {

/// Non-overlapping 2x2 max pooling, stride 2. An odd trailing row or column is
/// dropped. The gradient goes to the first maximum in (0,0), (0,1), (1,0), (1,1) order.
template <typename Scalar>
class MaxPool2x2 final : public Layer<Scalar> {
 public:
  std::string signature() const override { return "MaxPool2x2"; }

  Shape output_shape(const Shape& in) const override {
    if (in.h < 2 || in.w < 2) throw ShapeError("max pooling needs spatial extents >= 2, got " + in.str());
    return Shape{in.n, in.c, in.h / 2, in.w / 2};
  }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override { return pool(x, nullptr); }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream&) override {
    input_shape_ = x.shape();
    return pool(x, &argmax_);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) override {
    Tensor<Scalar> grad_in(input_shape_);
    for (std::size_t i = 0; i < argmax_.size(); ++i) grad_in.data()[argmax_[i]] += grad_out.data()[i];
    return grad_in;
  }

  std::size_t cached_bytes() const override { return argmax_.size() * sizeof(std::size_t); }
  void clear_cache() override { argmax_.clear(); }
  LayerPtr<Scalar> clone() const override { return std::make_unique<MaxPool2x2>(*this); }

 private:
  Tensor<Scalar> pool(const Tensor<Scalar>& x, std::vector<std::size_t>* argmax) const {
    const Shape& s = x.shape();
    const Shape o = output_shape(s);
    Tensor<Scalar> y(o);
    if (argmax) argmax->assign(o.size(), 0);
    std::size_t out_i = 0;
    for (int n = 0; n < o.n; ++n) {
      for (int c = 0; c < o.c; ++c) {
        for (int i = 0; i < o.h; ++i) {
          for (int j = 0; j < o.w; ++j, ++out_i) {
            std::size_t best = x.index(n, c, 2 * i, 2 * j);
            for (const std::size_t cand : {x.index(n, c, 2 * i, 2 * j + 1), x.index(n, c, 2 * i + 1, 2 * j),
                                           x.index(n, c, 2 * i + 1, 2 * j + 1)}) {
              if (x.data()[cand] > x.data()[best]) best = cand;
            }
            y.data()[out_i] = x.data()[best];
            if (argmax) (*argmax)[out_i] = best;
          }
        }
      }
    }
    return y;
  }

  Shape input_shape_{};
  std::vector<std::size_t> argmax_;
};

/// Mean over all spatial positions: (N, C, H, W) -> (N, C, 1, 1).
template <typename Scalar>
class GlobalAvgPool final : public Layer<Scalar> {
 public:
  std::string signature() const override { return "GlobalAvgPool"; }
  Shape output_shape(const Shape& in) const override { return Shape{in.n, in.c, 1, 1}; }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override {
    const Shape& s = x.shape();
    Tensor<Scalar> y(output_shape(s));
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        y(n, c, 0, 0) = static_cast<Scalar>(x.channel(n, c).template cast<double>().mean());
      }
    }
    return y;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream&) override {
    input_shape_ = x.shape();
    return infer(x);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) override {
    Tensor<Scalar> grad_in(input_shape_);
    const Scalar inv = Scalar(1) / static_cast<Scalar>(input_shape_.spatial());
    for (int n = 0; n < input_shape_.n; ++n) {
      for (int c = 0; c < input_shape_.c; ++c) grad_in.channel(n, c).setConstant(grad_out(n, c, 0, 0) * inv);
    }
    return grad_in;
  }

  LayerPtr<Scalar> clone() const override { return std::make_unique<GlobalAvgPool>(*this); }

 private:
  Shape input_shape_{};
};

/// Mean over the time (width) axis only: (N, C, H, W) -> (N, C, H, 1).
template <typename Scalar>
class TimeAvgPool final : public Layer<Scalar> {
 public:
  std::string signature() const override { return "TimeAvgPool"; }
  Shape output_shape(const Shape& in) const override { return Shape{in.n, in.c, in.h, 1}; }

  Tensor<Scalar> infer(const Tensor<Scalar>& x) const override {
    const Shape& s = x.shape();
    Tensor<Scalar> y(output_shape(s));
    for (int n = 0; n < s.n; ++n) {
      const auto in = x.sample(n);
      // Rows of the (C*H, W) view are the individual time series.
      const ConstRowMatrixMap<Scalar> rows(in.data(), static_cast<Eigen::Index>(s.c) * s.h, s.w);
      RowMatrixMap<Scalar> out(y.data() + static_cast<std::size_t>(n) * y.per_sample(),
                               static_cast<Eigen::Index>(s.c) * s.h, 1);
      out = rows.template cast<double>().rowwise().mean().template cast<Scalar>();
    }
    return y;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, RngStream&) override {
    input_shape_ = x.shape();
    return infer(x);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) override {
    const Shape& s = input_shape_;
    Tensor<Scalar> grad_in(s);
    const Scalar inv = Scalar(1) / static_cast<Scalar>(s.w);
    const std::size_t series = static_cast<std::size_t>(s.n) * s.c * s.h;
    for (std::size_t r = 0; r < series; ++r) {
      std::fill(grad_in.data() + r * s.w, grad_in.data() + (r + 1) * s.w, grad_out.data()[r] * inv);
    }
    return grad_in;
  }

  LayerPtr<Scalar> clone() const override { return std::make_unique<TimeAvgPool>(*this); }

 private:
  Shape input_shape_{};
};

}  // namespace keyscope::nn
