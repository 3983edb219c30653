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

#include "gpstate/gradcheck.hpp"

#include <functional>

#include "gpstate/model.hpp"

namespace gpstate {

namespace {

using Mat = Matrix<double>;
constexpr double kStep = 1e-6;
constexpr Index kMaxEntries = 400;
// Below this gradient scale the comparison is absolute. A conv bias feeding a
// train-mode batchnorm has an identically zero gradient.
constexpr double kScaleFloor = 1e-3;

// Entries of `x` visited by the check: all of them, or an even stride.
double fd_error(const std::function<double()>& objective, Mat& x, const Mat& analytic) {
  const Index n = x.size();
  const Index stride = std::max<Index>(1, n / kMaxEntries);
  double num_max = 0.0, diff_max = 0.0;
  for (Index i = 0; i < n; i += stride) {
    const double keep = x.data()[i];
    x.data()[i] = keep + kStep;
    const double up = objective();
    x.data()[i] = keep - kStep;
    const double down = objective();
    x.data()[i] = keep;
    const double numeric = (up - down) / (2 * kStep);
    num_max = std::max(num_max, std::abs(numeric));
    diff_max = std::max(diff_max, std::abs(numeric - analytic.data()[i]));
  }
  return diff_max / std::max(num_max, kScaleFloor);
}

// Random data away from the ReLU kink.
Mat random_matrix(UniformInit& rng, Index rows, Index cols, double bound = 1.0) {
  Mat m(rows, cols);
  rng.fill(m, bound);
  for (Index i = 0; i < m.size(); ++i)
    if (std::abs(m.data()[i]) < 1e-3) m.data()[i] = 0.5;
  return m;
}

TensorD random_tensor(UniformInit& rng, Index b, Index c, Index n0, Index n1) {
  TensorD t(b, c, n0, n1);
  t.values = random_matrix(rng, n0 * n1, b * c);
  return t;
}

class Suite {
 public:
  Suite(double tol, std::vector<GradCheckResult>& out) : tol_(tol), out_(out) {}
  void add(const std::string& name, double err) { out_.push_back({name, err, err < tol_}); }

 private:
  double tol_;
  std::vector<GradCheckResult>& out_;
};

// Objective sum(w .* layer(x)) for a tensor-to-tensor layer; checks d/dx and
// every listed parameter.
template <typename Fwd, typename Bwd>
void check_layer(Suite& suite, const std::string& name, UniformInit& rng, TensorD x, Fwd fwd, Bwd bwd,
                 std::vector<Parameter<double>*> params) {
  const TensorD probe = fwd(x);
  const Mat w = random_matrix(rng, probe.values.rows(), probe.values.cols());
  auto objective = [&] { return (fwd(x).values.array() * w.array()).sum(); };
  for (auto* p : params) p->zero_grad();
  fwd(x);
  TensorD g = probe.zeros_like();
  g.values = w;
  const TensorD dx = bwd(g);
  std::vector<Mat> grads;
  for (auto* p : params) grads.push_back(p->grad);
  suite.add(name + " d/dx", fd_error(objective, x.values, dx.values));
  for (size_t k = 0; k < params.size(); ++k)
    suite.add(name + " d/d" + params[k]->name, fd_error(objective, params[k]->value, grads[k]));
}

void check_net(Suite& suite, const std::string& name, UniformInit& rng, NetConfig cfg) {
  GroundStateNetD net(cfg);
  // Perturb batchnorm affine parameters so they are not trivially one and zero.
  for (auto& b : net.blocks()) {
    b.norm.gamma.value = (random_matrix(rng, cfg.channels, 1, 0.3).array() + 1.0).matrix();
    b.norm.beta.value = random_matrix(rng, cfg.channels, 1, 0.3);
  }
  Mat coeffs = random_matrix(rng, 3, cfg.in_features, 2.0);
  TensorD target(3, cfg.out_channels, cfg.n0, cfg.n1);
  target.values = (random_matrix(rng, cfg.n0 * cfg.n1, 3 * cfg.out_channels).array() * 0.5 + 0.5).matrix();
  const double dv = 0.1;
  auto objective = [&] { return integral_mse_loss(net.forward(coeffs, Mode::Train), target, dv).value; };
  net.zero_grad();
  const auto loss = integral_mse_loss(net.forward(coeffs, Mode::Train), target, dv);
  const Mat dcoeffs = net.backward(loss.grad);
  std::vector<Mat> grads;
  for (auto* p : net.parameters()) grads.push_back(p->grad);
  suite.add(name + " d/dcoefficients", fd_error(objective, coeffs, dcoeffs));
  const auto ps = net.parameters();
  for (size_t k = 0; k < ps.size(); ++k)
    suite.add(name + " d/d" + ps[k]->name, fd_error(objective, ps[k]->value, grads[k]));
}

}  // namespace

std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed, double tolerance) {
  std::vector<GradCheckResult> results;
  Suite suite(tolerance, results);
  UniformInit rng(seed);

  {
    Dense<double> dense(2, 3, 8, 1);
    dense.init(rng);
    Mat in = random_matrix(rng, 4, 2);
    TensorD probe = dense.forward(in);
    const Mat w = random_matrix(rng, probe.values.rows(), probe.values.cols());
    auto objective = [&] { return (dense.forward(in).values.array() * w.array()).sum(); };
    dense.weight.zero_grad();
    dense.bias.zero_grad();
    dense.forward(in);
    TensorD g = probe.zeros_like();
    g.values = w;
    const Mat din = dense.backward(g);
    const Mat gw = dense.weight.grad, gb = dense.bias.grad;
    suite.add("dense d/dx", fd_error(objective, in, din));
    suite.add("dense d/dweight", fd_error(objective, dense.weight.value, gw));
    suite.add("dense d/dbias", fd_error(objective, dense.bias.value, gb));
  }

  for (Index d : {1, 2, 4}) {
    Conv<double> conv(3, 2, 3, d, 1, "conv1d");
    conv.init(rng);
    check_layer(
        suite, "conv1d(dilation=" + std::to_string(d) + ")", rng, random_tensor(rng, 2, 3, 16, 1),
        [&](const TensorD& x) { return conv.forward(x); }, [&](const TensorD& g) { return conv.backward(g); },
        {&conv.weight, &conv.bias});
  }
  for (Index d : {1, 2}) {
    Conv<double> conv(2, 3, 3, d, 2, "conv2d");
    conv.init(rng);
    check_layer(
        suite, "conv2d(dilation=" + std::to_string(d) + ")", rng, random_tensor(rng, 2, 2, 8, 6),
        [&](const TensorD& x) { return conv.forward(x); }, [&](const TensorD& g) { return conv.backward(g); },
        {&conv.weight, &conv.bias});
  }
  for (Mode mode : {Mode::Train, Mode::Eval}) {
    BatchNorm<double> bn(3, 1e-5, 0.1, "bn");
    bn.gamma.value = (random_matrix(rng, 3, 1, 0.3).array() + 1.0).matrix();
    bn.beta.value = random_matrix(rng, 3, 1, 0.3);
    const TensorD x = random_tensor(rng, 4, 3, 10, 1);
    bn.forward(x, Mode::Train);  // populate running statistics
    check_layer(
        suite, mode == Mode::Train ? "batchnorm(train)" : "batchnorm(eval)", rng, x,
        [&](const TensorD& t) { return bn.forward(t, mode); }, [&](const TensorD& g) { return bn.backward(g); },
        {&bn.gamma, &bn.beta});
  }
  {
    LeakyRelu<double> act(0.01);
    check_layer(
        suite, "leaky_relu", rng, random_tensor(rng, 2, 2, 12, 1), [&](const TensorD& x) { return act.forward(x); },
        [&](const TensorD& g) { return act.backward(g); }, {});
  }
  {
    Sigmoid<double> sig;
    check_layer(
        suite, "sigmoid", rng, random_tensor(rng, 2, 2, 12, 1), [&](const TensorD& x) { return sig.forward(x); },
        [&](const TensorD& g) { return sig.backward(g); }, {});
  }
  {
    const TensorD other = random_tensor(rng, 2, 2, 12, 1);
    check_layer(
        suite, "residual_add", rng, random_tensor(rng, 2, 2, 12, 1),
        [&](const TensorD& x) { return residual_add(x, other); },
        [&](const TensorD& g) { return residual_add_backward(g).first; }, {});
  }
  {
    TensorD pred = random_tensor(rng, 3, 2, 10, 1);
    const TensorD target = random_tensor(rng, 3, 2, 10, 1);
    auto objective = [&] { return integral_mse_loss(pred, target, 0.25).value; };
    const Mat grad = integral_mse_loss(pred, target, 0.25).grad.values;
    suite.add("integral_mse_loss d/dpred", fd_error(objective, pred.values, grad));
  }

  NetConfig one;
  one.n0 = 32;
  one.channels = 4;
  one.dilations = {1, 2, 4, 1};
  one.input_offset = 0.5;
  one.input_scale = 2.0;
  one.seed = seed + 1;
  check_net(suite, "net1d", rng, one);

  NetConfig two = one;
  two.spatial_dims = 2;
  two.n0 = 8;
  two.n1 = 6;
  two.channels = 3;
  two.dilations = {1, 2, 1};
  two.out_channels = 2;
  check_net(suite, "net2d", rng, two);
  return results;
}

}  // namespace gpstate
