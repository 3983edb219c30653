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

#ifndef GPSTATE_SPECTRAL_HPP
#define GPSTATE_SPECTRAL_HPP

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <vector>

#include "gpstate/grid.hpp"

namespace gpstate {

/// Separable 1D/2D complex DFT on the (nx, ny) layout, backed by Eigen's FFT.
///
/// forward() is unnormalized; inverse() carries the 1/N factor. Holds plan
/// caches and scratch buffers, so one workspace must not be shared between
/// threads.
template <typename Scalar>
class SpectralWorkspace {
 public:
  using Complex = std::complex<Scalar>;

  void forward(ComplexArray<Scalar>& a) { transform(a, true); }
  void inverse(ComplexArray<Scalar>& a) { transform(a, false); }

 private:
  void transform(ComplexArray<Scalar>& a, bool fwd) {
    const Index nx = a.rows();
    const Index ny = a.cols();
    out_.resize(static_cast<size_t>(std::max(nx, ny)));
    if (nx > 1) {
      for (Index j = 0; j < ny; ++j) {
        Complex* col = a.col(j).data();
        run(out_.data(), col, nx, fwd);
        std::copy_n(out_.data(), nx, col);
      }
    }
    if (ny > 1) {
      in_.resize(static_cast<size_t>(ny));
      for (Index i = 0; i < nx; ++i) {
        for (Index j = 0; j < ny; ++j) in_[j] = a(i, j);
        run(out_.data(), in_.data(), ny, fwd);
        for (Index j = 0; j < ny; ++j) a(i, j) = out_[j];
      }
    }
  }

  void run(Complex* dst, const Complex* src, Index n, bool fwd) {
    if (fwd)
      fft_.fwd(dst, src, n);
    else
      fft_.inv(dst, src, n);
  }

  Eigen::FFT<Scalar> fft_;
  std::vector<Complex> in_;
  std::vector<Complex> out_;
};

namespace detail {
template <typename Scalar>
SpectralWorkspace<Scalar>& thread_workspace() {
  thread_local SpectralWorkspace<Scalar> ws;
  return ws;
}
}  // namespace detail

/// Unnormalized forward DFT of a field (k-space values, DFT ordering).
template <typename Scalar>
Field<Scalar> dft_forward(const Field<Scalar>& field) {
  ComplexArray<Scalar> v = field.values;
  detail::thread_workspace<Scalar>().forward(v);
  return Field<Scalar>(field.grid, std::move(v));
}

/// Inverse DFT including the 1/N normalization.
template <typename Scalar>
Field<Scalar> dft_inverse(const Field<Scalar>& field) {
  ComplexArray<Scalar> v = field.values;
  detail::thread_workspace<Scalar>().inverse(v);
  return Field<Scalar>(field.grid, std::move(v));
}

/// Precomputed k-space factors exp(-dtau * k^2 / 2) for imaginary-time kinetic flow.
template <typename Scalar>
struct KineticPropagator {
  GridPtr<Scalar> grid;
  Scalar dtau;
  RealArray<Scalar> factors;
};

template <typename Scalar>
KineticPropagator<Scalar> make_kinetic_propagator(GridPtr<Scalar> grid, Scalar dtau) {
  if (!(dtau >= Scalar(0)) || !std::isfinite(dtau))
    throw ValidationError("kinetic propagator: time step must be finite and non-negative");
  RealArray<Scalar> f = (-dtau * Scalar(0.5) * grid->k_squared()).exp();
  return {std::move(grid), dtau, std::move(f)};
}

/// In-place kinetic flow on raw values; the caller guarantees matching shape.
template <typename Scalar>
void apply_kinetic_inplace(ComplexArray<Scalar>& values, const KineticPropagator<Scalar>& prop,
                           SpectralWorkspace<Scalar>& ws) {
  ws.forward(values);
  values *= prop.factors.template cast<std::complex<Scalar>>();
  ws.inverse(values);
}

template <typename Scalar>
Field<Scalar> apply_kinetic(const Field<Scalar>& field, const KineticPropagator<Scalar>& prop) {
  require_same_grid(*field.grid, *prop.grid, "apply_kinetic");
  ComplexArray<Scalar> v = field.values;
  apply_kinetic_inplace(v, prop, detail::thread_workspace<Scalar>());
  return Field<Scalar>(field.grid, std::move(v));
}

}  // namespace gpstate

#endif  // GPSTATE_SPECTRAL_HPP
