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

// Independent reference implementations used only by the tests.

#ifndef GPSTATE_TESTS_ORACLES_HPP
#define GPSTATE_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// Direct O(N^2) DFT, X_k = sum_j x_j exp(-2 pi i jk/N).
inline std::vector<cplx> naive_dft(const std::vector<cplx>& x, bool inverse = false) {
  const size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> out(n);
  for (size_t k = 0; k < n; ++k) {
    cplx acc = 0;
    for (size_t j = 0; j < n; ++j) {
      const double phase = sign * 2.0 * std::numbers::pi * double((j * k) % n) / double(n);
      acc += x[j] * cplx(std::cos(phase), std::sin(phase));
    }
    out[k] = inverse ? acc / double(n) : acc;
  }
  return out;
}

/// Dense periodic spectral kinetic matrix -1/2 d^2/dx^2 on N points of spacing dx:
/// T_jl = (1/N) sum_m (k_m^2 / 2) cos(k_m (x_j - x_l)), k_m in DFT ordering.
inline Eigen::MatrixXd spectral_kinetic_matrix(int n, double dx) {
  Eigen::VectorXd k(n);
  for (int m = 0; m < n; ++m) {
    const int f = m < (n + 1) / 2 ? m : m - n;
    k(m) = 2.0 * std::numbers::pi * f / (n * dx);
  }
  Eigen::MatrixXd t(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double acc = 0;
      for (int m = 0; m < n; ++m) acc += 0.5 * k(m) * k(m) * std::cos(k(m) * (j - l) * dx);
      t(j, l) = acc / n;
    }
  return t;
}

struct EigenPair {
  double value;
  Eigen::VectorXd vector;  // unit Euclidean norm, non-negative at its peak
};

inline EigenPair lowest_eigenpair(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  Eigen::VectorXd v = es.eigenvectors().col(0);
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  if (v(i) < 0) v = -v;
  return {es.eigenvalues()(0), v};
}

/// Gaussian exp(-x^2 / (2 s2)) after imaginary-time free flow for time t:
/// the variance grows to s2 + t and the amplitude shrinks by sqrt(s2 / (s2 + t)).
inline double heat_kernel_gaussian(double x, double s2, double t) {
  return std::sqrt(s2 / (s2 + t)) * std::exp(-x * x / (2.0 * (s2 + t)));
}

}  // namespace oracle

#endif  // GPSTATE_TESTS_ORACLES_HPP
