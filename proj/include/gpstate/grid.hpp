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

#ifndef GPSTATE_GRID_HPP
#define GPSTATE_GRID_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "gpstate/errors.hpp"

namespace gpstate {

using Index = Eigen::Index;

template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using AxisArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct AxisSpec {
  Scalar min;
  Scalar max;
  Index points;
};

/// Wavenumbers in DFT ordering: k_j = 2*pi*f_j / (n*dx), f = 0, 1, ..., -1.
template <typename Scalar>
AxisArray<Scalar> fft_wavenumbers(Index n, Scalar dx) {
  AxisArray<Scalar> k(n);
  const Scalar scale = Scalar(2) * std::numbers::pi_v<Scalar> / (Scalar(n) * dx);
  for (Index j = 0; j < n; ++j) {
    const Index f = (j < (n + 1) / 2) ? j : j - n;
    k(j) = scale * Scalar(f);
  }
  return k;
}

/// Uniform periodic grid in one or two dimensions.
///
/// Samples exclude the right endpoint: x_j = min + j*dx, dx = (max - min)/N.
/// Two-dimensional arrays are stored column-major with shape (nx, ny), so
/// the x index runs fastest. One-dimensional grids use ny = 1.
template <typename Scalar>
class Grid {
 public:
  Grid(int dims, const std::vector<AxisSpec<Scalar>>& axes) : dims_(dims) {
    if (dims != 1 && dims != 2) throw ValidationError("grid: dims must be 1 or 2");
    if (static_cast<int>(axes.size()) != dims)
      throw ValidationError("grid: expected " + std::to_string(dims) + " axis specs, got " +
                            std::to_string(axes.size()));
    for (int a = 0; a < dims; ++a) {
      const auto& ax = axes[a];
      if (ax.points <= 0)
        throw ValidationError("grid: non-positive point count on axis " + std::to_string(a));
      if (ax.points < 8)
        throw ValidationError("grid: at least 8 points required on axis " + std::to_string(a));
      if (!(ax.max > ax.min) || !std::isfinite(ax.min) || !std::isfinite(ax.max))
        throw ValidationError("grid: inverted or non-finite extent on axis " + std::to_string(a));
      axes_[a] = ax;
      spacing_[a] = (ax.max - ax.min) / Scalar(ax.points);
      coords_[a] = AxisArray<Scalar>(ax.points);
      for (Index j = 0; j < ax.points; ++j) coords_[a](j) = ax.min + Scalar(j) * spacing_[a];
      wavenumbers_[a] = fft_wavenumbers(ax.points, spacing_[a]);
    }
    if (dims == 1) {
      axes_[1] = {Scalar(0), Scalar(1), 1};
      spacing_[1] = Scalar(1);
      coords_[1] = AxisArray<Scalar>::Zero(1);
      wavenumbers_[1] = AxisArray<Scalar>::Zero(1);
    }
  }

  int dims() const { return dims_; }
  Index nx() const { return axes_[0].points; }
  Index ny() const { return axes_[1].points; }
  Index size() const { return nx() * ny(); }
  const AxisSpec<Scalar>& axis(int a) const { return axes_[a]; }
  Scalar dx() const { return spacing_[0]; }
  Scalar dy() const { return spacing_[1]; }
  Scalar cell_volume() const { return dims_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1]; }
  const AxisArray<Scalar>& x() const { return coords_[0]; }
  const AxisArray<Scalar>& y() const { return coords_[1]; }
  const AxisArray<Scalar>& kx() const { return wavenumbers_[0]; }
  const AxisArray<Scalar>& ky() const { return wavenumbers_[1]; }

  /// |k|^2 on the (nx, ny) layout.
  RealArray<Scalar> k_squared() const {
    RealArray<Scalar> k2(nx(), ny());
    for (Index j = 0; j < ny(); ++j) k2.col(j) = kx().square() + ky()(j) * ky()(j);
    return k2;
  }

  /// Position coordinate arrays broadcast to the (nx, ny) layout.
  RealArray<Scalar> x_mesh() const { return x().replicate(1, ny()); }
  RealArray<Scalar> y_mesh() const { return y().transpose().replicate(nx(), 1); }

  bool operator==(const Grid& other) const {
    if (dims_ != other.dims_) return false;
    for (int a = 0; a < 2; ++a) {
      if (axes_[a].points != other.axes_[a].points || axes_[a].min != other.axes_[a].min ||
          axes_[a].max != other.axes_[a].max)
        return false;
    }
    return true;
  }

 private:
  int dims_;
  AxisSpec<Scalar> axes_[2];
  Scalar spacing_[2];
  AxisArray<Scalar> coords_[2];
  AxisArray<Scalar> wavenumbers_[2];
};

template <typename Scalar>
using GridPtr = std::shared_ptr<const Grid<Scalar>>;

template <typename Scalar>
GridPtr<Scalar> make_grid(int dims, const std::vector<AxisSpec<Scalar>>& axes) {
  return std::make_shared<const Grid<Scalar>>(dims, axes);
}

template <typename Scalar>
GridPtr<Scalar> make_grid_1d(Scalar min, Scalar max, Index points) {
  return make_grid<Scalar>(1, {{min, max, points}});
}

template <typename Scalar>
GridPtr<Scalar> make_grid_2d(Scalar x_min, Scalar x_max, Index nx, Scalar y_min, Scalar y_max,
                             Index ny) {
  return make_grid<Scalar>(2, {{x_min, x_max, nx}, {y_min, y_max, ny}});
}

template <typename Scalar>
void require_same_grid(const Grid<Scalar>& a, const Grid<Scalar>& b, const char* where) {
  if (&a != &b && !(a == b)) throw ValidationError(std::string(where) + ": grid mismatch");
}

/// Complex wave-function samples on a grid.
template <typename Scalar>
struct Field {
  GridPtr<Scalar> grid;
  ComplexArray<Scalar> values;

  Field(GridPtr<Scalar> g, ComplexArray<Scalar> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.rows() != grid->nx() || values.cols() != grid->ny())
      throw ValidationError("field: shape does not match grid");
  }
  static Field zeros(GridPtr<Scalar> g) {
    auto v = ComplexArray<Scalar>::Zero(g->nx(), g->ny()).eval();
    return Field(std::move(g), std::move(v));
  }
  static Field from_real(GridPtr<Scalar> g, const RealArray<Scalar>& re) {
    return Field(std::move(g), re.template cast<std::complex<Scalar>>());
  }
};

/// Two components sharing one grid.
template <typename Scalar>
struct TwoComponentField {
  GridPtr<Scalar> grid;
  ComplexArray<Scalar> first;
  ComplexArray<Scalar> second;

  TwoComponentField(GridPtr<Scalar> g, ComplexArray<Scalar> a, ComplexArray<Scalar> b)
      : grid(std::move(g)), first(std::move(a)), second(std::move(b)) {
    if (first.rows() != grid->nx() || first.cols() != grid->ny() ||
        second.rows() != grid->nx() || second.cols() != grid->ny())
      throw ValidationError("two-component field: shape does not match grid");
  }
  Field<Scalar> component(int i) const { return Field<Scalar>(grid, i == 0 ? first : second); }
};

/// Degenerate-field threshold for renormalization.
template <typename Scalar>
constexpr Scalar kDegenerateNorm = Scalar(1e-300);

template <typename Scalar>
Scalar l2_norm_sq(const Field<Scalar>& field) {
  return field.values.abs2().sum() * field.grid->cell_volume();
}

template <typename Scalar>
Scalar l2_norm_sq(const TwoComponentField<Scalar>& field) {
  return (field.first.abs2().sum() + field.second.abs2().sum()) * field.grid->cell_volume();
}

namespace detail {
template <typename Scalar>
Scalar checked_norm(Scalar norm_sq, const char* where) {
  if (!std::isfinite(norm_sq)) throw NumericalError(std::string(where) + ": non-finite norm");
  if (norm_sq < kDegenerateNorm<Scalar>)
    throw DegenerateFieldError(std::string(where) + ": degenerate field (norm below 1e-300)");
  return std::sqrt(norm_sq);
}
}  // namespace detail

template <typename Scalar>
Field<Scalar> normalize_l2(const Field<Scalar>& field) {
  const Scalar norm = detail::checked_norm(l2_norm_sq(field), "normalize_l2");
  return Field<Scalar>(field.grid, field.values / norm);
}

/// Joint normalization: the summed density of both components integrates to one.
template <typename Scalar>
TwoComponentField<Scalar> normalize_l2(const TwoComponentField<Scalar>& field) {
  const Scalar norm = detail::checked_norm(l2_norm_sq(field), "normalize_l2");
  return TwoComponentField<Scalar>(field.grid, field.first / norm, field.second / norm);
}

/// |psi| / max|psi|, values in [0, 1] with maximum exactly 1.
template <typename Scalar>
RealArray<Scalar> max_normalize(const Field<Scalar>& field) {
  RealArray<Scalar> amp = field.values.abs();
  const Scalar peak = amp.maxCoeff();
  if (!(peak > Scalar(0))) throw DegenerateFieldError("max_normalize: all-zero field");
  amp /= peak;
  return amp;
}

/// Both components divided by the common maximum, so relative populations survive.
template <typename Scalar>
std::pair<RealArray<Scalar>, RealArray<Scalar>> max_normalize(
    const TwoComponentField<Scalar>& field) {
  RealArray<Scalar> a = field.first.abs();
  RealArray<Scalar> b = field.second.abs();
  const Scalar peak = std::max(a.maxCoeff(), b.maxCoeff());
  if (!(peak > Scalar(0))) throw DegenerateFieldError("max_normalize: all-zero field");
  a /= peak;
  b /= peak;
  return {std::move(a), std::move(b)};
}

using GridD = Grid<double>;
using FieldD = Field<double>;
using TwoComponentFieldD = TwoComponentField<double>;

}  // namespace gpstate

#endif  // GPSTATE_GRID_HPP
