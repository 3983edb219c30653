// Copyright 2026 The gpstate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GPSTATE_TENSOR_HPP
#define GPSTATE_TENSOR_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gpstate/errors.hpp"

namespace gpstate {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Mode { Train, Eval };

/// Batch of multi-channel spatial maps.
///
/// `values` has one column per (sample, channel) pair, column b*channels + c,
/// and one row per spatial point. Points are column-major over (n0, n1), the
/// same layout as grid fields; one-dimensional maps use n1 = 1.
template <typename Scalar>
struct Tensor {
  Index batch = 0;
  Index channels = 0;
  Index n0 = 1;
  Index n1 = 1;
  Matrix<Scalar> values;

  Tensor() = default;
  Tensor(Index b, Index c, Index s0, Index s1)
      : batch(b), channels(c), n0(s0), n1(s1), values(Matrix<Scalar>::Zero(s0 * s1, b * c)) {}

  Index points() const { return n0 * n1; }
  auto sample(Index b) { return values.middleCols(b * channels, channels); }
  auto sample(Index b) const { return values.middleCols(b * channels, channels); }
  bool same_shape(const Tensor& o) const {
    return batch == o.batch && channels == o.channels && n0 == o.n0 && n1 == o.n1;
  }
  Tensor zeros_like() const { return Tensor(batch, channels, n0, n1); }
};

template <typename Scalar>
void check_finite(const Tensor<Scalar>& t, const char* where) {
  if (!t.values.allFinite()) throw NumericalError(std::string(where) + ": non-finite tensor entry");
}

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what + ": shape mismatch");
}

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;

  Parameter() = default;
  Parameter(std::string n, Index rows, Index cols)
      : name(std::move(n)), value(Matrix<Scalar>::Zero(rows, cols)), grad(Matrix<Scalar>::Zero(rows, cols)) {}
  void zero_grad() { grad.setZero(); }
};

/// Seeded uniform draws in [-bound, bound); bit-reproducible across platforms.
class UniformInit {
 public:
  explicit UniformInit(std::uint64_t seed) : rng_(seed) {}
  template <typename Scalar>
  void fill(Matrix<Scalar>& m, double bound) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        m(i, j) = static_cast<Scalar>((2.0 * u - 1.0) * bound);
      }
  }

 private:
  std::mt19937_64 rng_;
};

/// Fully connected lift from `in_features` scalars to a (channels x spatial) map.
template <typename Scalar>
class Dense {
 public:
  Dense(Index in_features, Index out_channels, Index n0, Index n1)
      : weight("dense.weight", out_channels * n0 * n1, in_features),
        bias("dense.bias", out_channels * n0 * n1, 1),
        in_(in_features),
        out_(out_channels),
        n0_(n0),
        n1_(n1) {
    if (in_features <= 0 || out_channels <= 0 || n0 <= 0 || n1 <= 0)
      throw ValidationError("dense: non-positive dimension");
  }

  /// input: (batch, in_features).
  Tensor<Scalar> forward(const Matrix<Scalar>& input) {
    require_shape(input.cols() == in_, "dense_forward");
    input_ = input;
    const Index b = input.rows();
    Tensor<Scalar> out(b, out_, n0_, n1_);
    const Index p = n0_ * n1_;
    for (Index s = 0; s < b; ++s) {
      Vector<Scalar> y = weight.value * input.row(s).transpose() + bias.value;
      out.sample(s) = Eigen::Map<const Matrix<Scalar>>(y.data(), p, out_);
    }
    return out;
  }

  /// Accumulates parameter gradients; returns d(loss)/d(input).
  Matrix<Scalar> backward(const Tensor<Scalar>& grad_out) {
    require_shape(grad_out.batch == input_.rows() && grad_out.channels == out_ &&
                      grad_out.n0 == n0_ && grad_out.n1 == n1_,
                  "dense_backward");
    Matrix<Scalar> grad_in(input_.rows(), in_);
    const Index len = out_ * n0_ * n1_;
    for (Index s = 0; s < grad_out.batch; ++s) {
      Matrix<Scalar> gy = grad_out.sample(s);
      Eigen::Map<const Vector<Scalar>> g(gy.data(), len);
      weight.grad.noalias() += g * input_.row(s);
      bias.grad += g;
      grad_in.row(s).noalias() = (weight.value.transpose() * g).transpose();
    }
    return grad_in;
  }

  void init(UniformInit& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    rng.fill(weight.value, bound);
    rng.fill(bias.value, bound);
  }

  Index in_features() const { return in_; }
  Index out_channels() const { return out_; }

  Parameter<Scalar> weight;
  Parameter<Scalar> bias;

 private:
  Index in_, out_, n0_, n1_;
  Matrix<Scalar> input_;
};

/// Dilated cross-correlation with "same" zero padding, computed as im2col + GEMM.
///
/// Taps sit at offsets (t - (k-1)/2) * dilation along each convolved axis;
/// out[p] = bias + sum_t w[t] * in[p + offset_t].
template <typename Scalar>
class Conv {
 public:
  Conv(Index in_channels, Index out_channels, Index kernel, Index dilation, int spatial_dims,
       std::string name = "conv")
      : weight(name + ".weight", out_channels, in_channels * taps(kernel, spatial_dims)),
        bias(name + ".bias", out_channels, 1),
        in_(in_channels),
        out_(out_channels),
        kernel_(kernel),
        dilation_(dilation),
        dims_(spatial_dims) {
    if (kernel <= 0 || kernel % 2 == 0) throw ValidationError("conv: kernel size must be odd");
    if (dilation <= 0) throw ValidationError("conv: dilation must be positive");
    if (spatial_dims != 1 && spatial_dims != 2) throw ValidationError("conv: spatial dims must be 1 or 2");
    if (in_channels <= 0 || out_channels <= 0) throw ValidationError("conv: non-positive channels");
    const Index half = (kernel - 1) / 2;
    if (dims_ == 1) {
      for (Index t = 0; t < kernel; ++t) offsets_.push_back({(t - half) * dilation, 0});
    } else {
      for (Index b = 0; b < kernel; ++b)
        for (Index a = 0; a < kernel; ++a)
          offsets_.push_back({(a - half) * dilation, (b - half) * dilation});
    }
  }

  static Index taps(Index kernel, int dims) { return dims == 1 ? kernel : kernel * kernel; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    check_input(x, "conv_dilated_forward");
    input_ = x;
    Tensor<Scalar> out(x.batch, out_, x.n0, x.n1);
    for (Index s = 0; s < x.batch; ++s) {
      im2col(x.sample(s), x.n0, x.n1);
      auto y = out.sample(s);
      y.noalias() = cols_ * weight.value.transpose();
      y.rowwise() += bias.value.col(0).transpose();
    }
    return out;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    require_shape(grad_out.batch == input_.batch && grad_out.channels == out_ &&
                      grad_out.n0 == input_.n0 && grad_out.n1 == input_.n1,
                  "conv_dilated_backward");
    Tensor<Scalar> grad_in = input_.zeros_like();
    for (Index s = 0; s < input_.batch; ++s) {
      im2col(input_.sample(s), input_.n0, input_.n1);
      const auto gy = grad_out.sample(s);
      weight.grad.noalias() += gy.transpose() * cols_;
      bias.grad.col(0) += gy.colwise().sum().transpose();
      dcols_.noalias() = gy * weight.value;
      auto gx = grad_in.sample(s);
      col2im(gx, input_.n0, input_.n1);
    }
    return grad_in;
  }

  void init(UniformInit& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(weight.value.cols()));
    rng.fill(weight.value, bound);
    rng.fill(bias.value, bound);
  }

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }
  Index kernel() const { return kernel_; }
  Index dilation() const { return dilation_; }

  Parameter<Scalar> weight;  // (out, in * taps), column ci * taps + t
  Parameter<Scalar> bias;

 private:
  struct Offset {
    Index d0, d1;
  };

  void check_input(const Tensor<Scalar>& x, const char* where) const {
    require_shape(x.channels == in_, where);
    if (dims_ == 1 && x.n1 != 1) throw ValidationError(std::string(where) + ": 1D conv needs n1 == 1");
  }

  template <typename Map>
  void im2col(const Map& x, Index n0, Index n1) {
    const Index k = static_cast<Index>(offsets_.size());
    cols_.setZero(n0 * n1, in_ * k);
    for (Index c = 0; c < in_; ++c)
      for (Index t = 0; t < k; ++t) {
        const auto [o0, o1] = offsets_[t];
        const Index lo = std::max<Index>(0, -o0);
        const Index hi = std::min<Index>(n0, n0 - o0);
        if (lo >= hi) continue;
        for (Index i1 = 0; i1 < n1; ++i1) {
          const Index j1 = i1 + o1;
          if (j1 < 0 || j1 >= n1) continue;
          cols_.col(c * k + t).segment(i1 * n0 + lo, hi - lo) =
              x.col(c).segment(j1 * n0 + lo + o0, hi - lo);
        }
      }
  }

  template <typename Map>
  void col2im(Map& gx, Index n0, Index n1) const {
    const Index k = static_cast<Index>(offsets_.size());
    for (Index c = 0; c < in_; ++c)
      for (Index t = 0; t < k; ++t) {
        const auto [o0, o1] = offsets_[t];
        const Index lo = std::max<Index>(0, -o0);
        const Index hi = std::min<Index>(n0, n0 - o0);
        if (lo >= hi) continue;
        for (Index i1 = 0; i1 < n1; ++i1) {
          const Index j1 = i1 + o1;
          if (j1 < 0 || j1 >= n1) continue;
          gx.col(c).segment(j1 * n0 + lo + o0, hi - lo) +=
              dcols_.col(c * k + t).segment(i1 * n0 + lo, hi - lo);
        }
      }
  }

  Index in_, out_, kernel_, dilation_;
  int dims_;
  std::vector<Offset> offsets_;
  Tensor<Scalar> input_;
  Matrix<Scalar> cols_;
  Matrix<Scalar> dcols_;
};

/// Per-channel batch normalization over batch x spatial.
template <typename Scalar>
class BatchNorm {
 public:
  explicit BatchNorm(Index channels, Scalar eps = Scalar(1e-5), Scalar momentum = Scalar(0.1),
                     std::string name = "batchnorm")
      : gamma(name + ".gamma", channels, 1),
        beta(name + ".beta", channels, 1),
        running_mean(Vector<Scalar>::Zero(channels)),
        running_var(Vector<Scalar>::Ones(channels)),
        channels_(channels),
        eps_(eps),
        momentum_(momentum) {
    if (!(eps > Scalar(0))) throw ValidationError("batchnorm: epsilon must be positive");
    gamma.value.setOnes();
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    require_shape(x.channels == channels_, "batchnorm_forward");
    mode_ = mode;
    const Index count = x.batch * x.points();
    inv_std_.resize(channels_);
    mean_.resize(channels_);
    if (mode == Mode::Train) {
      if (count < 1) throw ValidationError("batchnorm_forward: empty batch");
      if (!stats_initialized) {
        running_mean.setZero();
        running_var.setOnes();
        stats_initialized = true;
      }
      for (Index c = 0; c < channels_; ++c) {
        Scalar sum = 0;
        for (Index s = 0; s < x.batch; ++s) sum += x.values.col(s * channels_ + c).sum();
        const Scalar mean = sum / Scalar(count);
        Scalar sq = 0;
        for (Index s = 0; s < x.batch; ++s)
          sq += (x.values.col(s * channels_ + c).array() - mean).square().sum();
        const Scalar var = sq / Scalar(count);
        mean_(c) = mean;
        inv_std_(c) = Scalar(1) / std::sqrt(var + eps_);
        const Scalar unbiased = count > 1 ? var * Scalar(count) / Scalar(count - 1) : var;
        running_mean(c) = (Scalar(1) - momentum_) * running_mean(c) + momentum_ * mean;
        running_var(c) = (Scalar(1) - momentum_) * running_var(c) + momentum_ * unbiased;
      }
    } else {
      if (!stats_initialized)
        throw ValidationError("batchnorm: eval mode before running statistics were initialized");
      for (Index c = 0; c < channels_; ++c) {
        mean_(c) = running_mean(c);
        inv_std_(c) = Scalar(1) / std::sqrt(running_var(c) + eps_);
      }
    }
    xhat_ = x.zeros_like();
    Tensor<Scalar> y = x.zeros_like();
    for (Index s = 0; s < x.batch; ++s)
      for (Index c = 0; c < channels_; ++c) {
        const Index col = s * channels_ + c;
        xhat_.values.col(col) = (x.values.col(col).array() - mean_(c)) * inv_std_(c);
        y.values.col(col) = (gamma.value(c, 0) * xhat_.values.col(col).array() + beta.value(c, 0));
      }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    require_shape(grad_out.same_shape(xhat_), "batchnorm_backward");
    const Index batch = grad_out.batch;
    const Scalar count = Scalar(batch * grad_out.points());
    Tensor<Scalar> grad_in = grad_out.zeros_like();
    for (Index c = 0; c < channels_; ++c) {
      Scalar sum_dy = 0, sum_dy_xhat = 0;
      for (Index s = 0; s < batch; ++s) {
        const Index col = s * channels_ + c;
        sum_dy += grad_out.values.col(col).sum();
        sum_dy_xhat += grad_out.values.col(col).dot(xhat_.values.col(col));
      }
      gamma.grad(c, 0) += sum_dy_xhat;
      beta.grad(c, 0) += sum_dy;
      const Scalar g = gamma.value(c, 0);
      for (Index s = 0; s < batch; ++s) {
        const Index col = s * channels_ + c;
        if (mode_ == Mode::Train) {
          grad_in.values.col(col) =
              (g * inv_std_(c) / count) *
              (count * grad_out.values.col(col).array() - sum_dy - xhat_.values.col(col).array() * sum_dy_xhat);
        } else {
          grad_in.values.col(col) = (g * inv_std_(c)) * grad_out.values.col(col);
        }
      }
    }
    return grad_in;
  }

  Index channels() const { return channels_; }
  Scalar eps() const { return eps_; }
  Scalar momentum() const { return momentum_; }

  Parameter<Scalar> gamma;
  Parameter<Scalar> beta;
  Vector<Scalar> running_mean;
  Vector<Scalar> running_var;
  bool stats_initialized = false;

 private:
  Index channels_;
  Scalar eps_;
  Scalar momentum_;
  Mode mode_ = Mode::Train;
  Vector<Scalar> mean_;
  Vector<Scalar> inv_std_;
  Tensor<Scalar> xhat_;
};

template <typename Scalar>
class LeakyRelu {
 public:
  explicit LeakyRelu(Scalar slope = Scalar(0.01)) : slope_(slope) {
    if (!(slope > Scalar(0) && slope < Scalar(1)))
      throw ValidationError("leaky_relu: slope must be in (0, 1)");
  }
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    input_ = x;
    Tensor<Scalar> y = x;
    y.values = x.values.array().max(slope_ * x.values.array());
    return y;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) const {
    require_shape(grad_out.same_shape(input_), "leaky_relu_backward");
    Tensor<Scalar> g = grad_out;
    g.values = (input_.values.array() > Scalar(0)).select(grad_out.values.array(), slope_ * grad_out.values.array());
    return g;
  }
  Scalar slope() const { return slope_; }

 private:
  Scalar slope_;
  Tensor<Scalar> input_;
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
class Sigmoid {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    output_ = x;
    output_.values = x.values.unaryExpr([](Scalar v) { return sigmoid(v); });
    return output_;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) const {
    require_shape(grad_out.same_shape(output_), "sigmoid_backward");
    Tensor<Scalar> g = grad_out;
    g.values = grad_out.values.array() * output_.values.array() * (Scalar(1) - output_.values.array());
    return g;
  }

 private:
  Tensor<Scalar> output_;
};

template <typename Scalar>
Tensor<Scalar> residual_add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  require_shape(a.same_shape(b), "residual_add");
  Tensor<Scalar> out = a;
  out.values += b.values;
  return out;
}

/// Both summands receive the upstream gradient unchanged.
template <typename Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> residual_add_backward(const Tensor<Scalar>& grad_out) {
  return {grad_out, grad_out};
}

template <typename Scalar>
struct LossResult {
  Scalar value;
  Tensor<Scalar> grad;
};

/// Riemann-sum distance (1/B) sum_b sum_{c,p} (pred - target)^2 dV, with gradient.
template <typename Scalar>
LossResult<Scalar> integral_mse_loss(const Tensor<Scalar>& pred, const Tensor<Scalar>& target, Scalar dv) {
  require_shape(pred.same_shape(target), "integral_mse_loss");
  if (!(dv > Scalar(0))) throw ValidationError("integral_mse_loss: dV must be positive");
  if (pred.batch <= 0) throw ValidationError("integral_mse_loss: empty batch");
  const Scalar b = Scalar(pred.batch);
  Tensor<Scalar> grad = pred;
  grad.values = pred.values - target.values;
  const Scalar value = grad.values.squaredNorm() * dv / b;
  grad.values *= Scalar(2) * dv / b;
  return {value, std::move(grad)};
}

using TensorD = Tensor<double>;

}  // namespace gpstate

#endif  // GPSTATE_TENSOR_HPP
