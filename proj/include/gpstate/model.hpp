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

#ifndef GPSTATE_MODEL_HPP
#define GPSTATE_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gpstate/tensor.hpp"

namespace gpstate {

/// Architecture of the coefficient-to-ground-state network.
struct NetConfig {
  int spatial_dims = 1;
  Index n0 = 128;
  Index n1 = 1;
  Index channels = 32;
  Index kernel = 3;
  std::vector<Index> dilations{1, 2, 4, 8, 16, 1};
  Index out_channels = 1;
  Index in_features = 1;
  double leaky_slope = 0.01;
  // Network input is (coefficient - input_offset) / input_scale.
  double input_offset = 0.0;
  double input_scale = 1.0;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (spatial_dims != 1 && spatial_dims != 2) throw ValidationError("net: spatial_dims must be 1 or 2");
    if (n0 <= 0 || n1 <= 0) throw ValidationError("net: grid size must be positive");
    if (spatial_dims == 1 && n1 != 1) throw ValidationError("net: 1D network needs n1 == 1");
    if (channels <= 0) throw ValidationError("net: channels must be positive");
    if (kernel <= 0 || kernel % 2 == 0) throw ValidationError("net: kernel must be odd");
    if (dilations.empty() || dilations.front() != 1 || dilations.back() != 1)
      throw ValidationError("net: dilation schedule must start and end with 1");
    for (Index d : dilations)
      if (d <= 0) throw ValidationError("net: dilations must be positive");
    if (out_channels != 1 && out_channels != 2) throw ValidationError("net: output channels must be 1 or 2");
    if (in_features <= 0) throw ValidationError("net: in_features must be positive");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ValidationError("net: leaky slope must be in (0, 1)");
    if (!(input_scale != 0.0) || !std::isfinite(input_scale) || !std::isfinite(input_offset))
      throw ValidationError("net: input normalization must be finite with nonzero scale");
    if (!(bn_eps > 0.0)) throw ValidationError("net: batchnorm epsilon must be positive");
    if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) throw ValidationError("net: batchnorm momentum must be in (0, 1]");
  }
};

struct LayerInfo {
  std::string type;
  std::vector<Index> shape;  // parameter shape (dense: out x in; conv: out x in x taps)
  Index dilation = 0;
  Index spatial = 0;         // points per channel map at the layer output
};

/// Dense lift -> residual blocks (conv, batchnorm, leaky ReLU, + input) ->
/// output conv -> sigmoid. One block per dilation entry.
template <typename Scalar>
class GroundStateNet {
 public:
  struct Block {
    Conv<Scalar> conv;
    BatchNorm<Scalar> norm;
    LeakyRelu<Scalar> act;
  };

  explicit GroundStateNet(NetConfig config)
      : config_((config.validate(), std::move(config))),
        dense_(config_.in_features, config_.channels, config_.n0, config_.n1),
        head_(config_.channels, config_.out_channels, config_.kernel, 1, config_.spatial_dims, "head") {
    for (size_t i = 0; i < config_.dilations.size(); ++i) {
      const std::string name = "block" + std::to_string(i);
      blocks_.push_back(Block{
          Conv<Scalar>(config_.channels, config_.channels, config_.kernel, config_.dilations[i],
                       config_.spatial_dims, name + ".conv"),
          BatchNorm<Scalar>(config_.channels, Scalar(config_.bn_eps), Scalar(config_.bn_momentum),
                            name + ".bn"),
          LeakyRelu<Scalar>(Scalar(config_.leaky_slope))});
    }
    UniformInit rng(config_.seed);
    dense_.init(rng);
    for (auto& b : blocks_) b.conv.init(rng);
    head_.init(rng);
  }

  const NetConfig& config() const { return config_; }

  /// coefficients: (batch, in_features) raw Hamiltonian coefficients.
  Tensor<Scalar> forward(const Matrix<Scalar>& coefficients, Mode mode) {
    require_shape(coefficients.cols() == config_.in_features, "net_forward");
    Matrix<Scalar> scaled =
        (coefficients.array() - Scalar(config_.input_offset)) / Scalar(config_.input_scale);
    Tensor<Scalar> h = dense_.forward(scaled);
    for (auto& b : blocks_) {
      Tensor<Scalar> z = b.act.forward(b.norm.forward(b.conv.forward(h), mode));
      h = residual_add(z, h);
    }
    Tensor<Scalar> y = out_.forward(head_.forward(h));
    check_finite(y, "net_forward");
    return y;
  }

  /// Backpropagates d(loss)/d(output); returns d(loss)/d(coefficients).
  Matrix<Scalar> backward(const Tensor<Scalar>& grad_out) {
    Tensor<Scalar> g = head_.backward(out_.backward(grad_out));
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
      Tensor<Scalar> through = it->conv.backward(it->norm.backward(it->act.backward(g)));
      g.values += through.values;  // identity branch of the residual sum
    }
    Matrix<Scalar> gin = dense_.backward(g);
    gin /= Scalar(config_.input_scale);
    for (auto* p : parameters())
      if (!p->grad.allFinite()) throw NumericalError("net_backward: non-finite gradient in " + p->name);
    return gin;
  }

  /// Eval-mode forward; requires initialized batchnorm statistics.
  Tensor<Scalar> predict(const Matrix<Scalar>& coefficients) { return forward(coefficients, Mode::Eval); }

  std::vector<Parameter<Scalar>*> parameters() {
    std::vector<Parameter<Scalar>*> ps{&dense_.weight, &dense_.bias};
    for (auto& b : blocks_) {
      ps.push_back(&b.conv.weight);
      ps.push_back(&b.conv.bias);
      ps.push_back(&b.norm.gamma);
      ps.push_back(&b.norm.beta);
    }
    ps.push_back(&head_.weight);
    ps.push_back(&head_.bias);
    return ps;
  }

  std::vector<const Parameter<Scalar>*> parameters() const {
    const auto ps = const_cast<GroundStateNet*>(this)->parameters();
    return {ps.begin(), ps.end()};
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  Index count_params() const {
    Index n = dense_.weight.value.size() + dense_.bias.value.size();
    for (const auto& b : blocks_)
      n += b.conv.weight.value.size() + b.conv.bias.value.size() + b.norm.gamma.value.size() +
           b.norm.beta.value.size();
    return n + head_.weight.value.size() + head_.bias.value.size();
  }

  std::vector<LayerInfo> manifest() const {
    const Index pts = config_.n0 * config_.n1;
    const Index taps = Conv<Scalar>::taps(config_.kernel, config_.spatial_dims);
    std::vector<LayerInfo> m;
    m.push_back({"dense", {config_.channels * pts, config_.in_features}, 0, pts});
    for (const auto& b : blocks_) {
      m.push_back({"conv", {config_.channels, config_.channels, taps}, b.conv.dilation(), pts});
      m.push_back({"batchnorm", {config_.channels}, 0, pts});
      m.push_back({"leaky_relu", {}, 0, pts});
    }
    m.push_back({"conv", {config_.out_channels, config_.channels, taps}, 1, pts});
    m.push_back({"sigmoid", {}, 0, pts});
    return m;
  }

  std::vector<Block>& blocks() { return blocks_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  Dense<Scalar>& dense() { return dense_; }
  Conv<Scalar>& head() { return head_; }

  bool stats_initialized() const {
    for (const auto& b : blocks_)
      if (!b.norm.stats_initialized) return false;
    return true;
  }

 private:
  NetConfig config_;
  Dense<Scalar> dense_;
  std::vector<Block> blocks_;
  Conv<Scalar> head_;
  Sigmoid<Scalar> out_;
};

using GroundStateNetD = GroundStateNet<double>;

}  // namespace gpstate

#endif  // GPSTATE_MODEL_HPP
