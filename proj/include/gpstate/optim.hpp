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

#ifndef GPSTATE_OPTIM_HPP
#define GPSTATE_OPTIM_HPP

#include <cmath>
#include <vector>

#include "gpstate/tensor.hpp"

namespace gpstate {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("adam: learning rate must be finite and >= 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw ValidationError("adam: betas must lie in (0, 1)");
    if (!(eps > 0.0)) throw ValidationError("adam: epsilon must be positive");
  }
};

/// First/second moment buffers, one pair per parameter, and the step count.
template <typename Scalar>
struct AdamState {
  std::vector<Matrix<Scalar>> m;
  std::vector<Matrix<Scalar>> v;
  long step = 0;
};

/// Bias-corrected Adam update applied to `params` in place.
template <typename Scalar>
void adam_step(const std::vector<Parameter<Scalar>*>& params, AdamState<Scalar>& state,
               const AdamConfig& config) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != params.size()) throw ValidationError("adam_step: parameter count changed");
  ++state.step;
  const Scalar b1 = Scalar(config.beta1), b2 = Scalar(config.beta2);
  const Scalar c1 = Scalar(1) - std::pow(b1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - std::pow(b2, Scalar(state.step));
  const Scalar lr = Scalar(config.lr), eps = Scalar(config.eps);
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols() ||
        state.m[i].rows() != p.value.rows() || state.m[i].cols() != p.value.cols())
      throw ValidationError("adam_step: shape mismatch for " + p.name);
    state.m[i] = b1 * state.m[i] + (Scalar(1) - b1) * p.grad;
    state.v[i] = b2 * state.v[i] + (Scalar(1) - b2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + eps);
  }
}

}  // namespace gpstate

#endif  // GPSTATE_OPTIM_HPP
