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

#ifndef GPSTATE_POTENTIAL_HPP
#define GPSTATE_POTENTIAL_HPP

#include <sstream>
#include <string>
#include <variant>

#include "gpstate/grid.hpp"

namespace gpstate {

/// 0.5 * omega^2 * x^2
template <typename Scalar>
struct Harmonic1D {
  Scalar omega = Scalar(1);
};

/// 0.5 * (omega_x^2 x^2 + omega_y^2 y^2)
template <typename Scalar>
struct Harmonic2D {
  Scalar omega_x = Scalar(1);
  Scalar omega_y = Scalar(1);
};

/// 0.5 x^2 + depth * cos^2 x (one-dimensional optical lattice in a trap).
template <typename Scalar>
struct LatticeA {
  Scalar depth = Scalar(24);
};

/// 0.5 (x^2 + aspect * y^2) + depth * cos^2 x.
template <typename Scalar>
struct LatticeB {
  Scalar depth = Scalar(1);
  Scalar aspect = Scalar(5);
};

/// Tabulated values on the (nx, ny) layout of a specific grid.
template <typename Scalar>
struct CustomPotential {
  RealArray<Scalar> values;
};

template <typename Scalar>
using PotentialSpec = std::variant<Harmonic1D<Scalar>, Harmonic2D<Scalar>, LatticeA<Scalar>,
                                   LatticeB<Scalar>, CustomPotential<Scalar>>;

template <typename Scalar>
int potential_dims(const PotentialSpec<Scalar>& spec) {
  return std::visit(
      [](const auto& p) -> int {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Harmonic1D<Scalar>> || std::is_same_v<P, LatticeA<Scalar>>)
          return 1;
        else if constexpr (std::is_same_v<P, CustomPotential<Scalar>>)
          return 0;  // any
        else
          return 2;
      },
      spec);
}

template <typename Scalar>
RealArray<Scalar> evaluate_potential(const PotentialSpec<Scalar>& spec, const Grid<Scalar>& grid) {
  const int want = potential_dims(spec);
  if (want != 0 && want != grid.dims())
    throw ValidationError("evaluate_potential: potential is " + std::to_string(want) +
                          "D but grid is " + std::to_string(grid.dims()) + "D");
  const RealArray<Scalar> x = grid.x_mesh();
  const RealArray<Scalar> y = grid.y_mesh();
  RealArray<Scalar> v = std::visit(
      [&](const auto& p) -> RealArray<Scalar> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Harmonic1D<Scalar>>) {
          return Scalar(0.5) * p.omega * p.omega * x.square();
        } else if constexpr (std::is_same_v<P, Harmonic2D<Scalar>>) {
          return Scalar(0.5) * (p.omega_x * p.omega_x * x.square() + p.omega_y * p.omega_y * y.square());
        } else if constexpr (std::is_same_v<P, LatticeA<Scalar>>) {
          return Scalar(0.5) * x.square() + p.depth * x.cos().square();
        } else if constexpr (std::is_same_v<P, LatticeB<Scalar>>) {
          return Scalar(0.5) * (x.square() + p.aspect * y.square()) + p.depth * x.cos().square();
        } else {
          if (p.values.rows() != grid.nx() || p.values.cols() != grid.ny())
            throw ValidationError("evaluate_potential: tabulated potential shape mismatch");
          return p.values;
        }
      },
      spec);
  if (!v.allFinite()) throw ValidationError("evaluate_potential: non-finite potential value");
  return v;
}

/// Parse "harmonic", "harmonic(2)", "harmonic(1,3)", "latticeA", "latticeB".
/// A bare "harmonic" picks the 1D or 2D isotropic trap from `dims`.
template <typename Scalar>
PotentialSpec<Scalar> parse_potential(const std::string& text, int dims) {
  const auto open = text.find('(');
  const std::string name = text.substr(0, open);
  std::vector<Scalar> args;
  if (open != std::string::npos) {
    const auto close = text.find(')', open);
    if (close == std::string::npos) throw ValidationError("potential: missing ')' in '" + text + "'");
    std::stringstream ss(text.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        args.push_back(static_cast<Scalar>(std::stod(item)));
      } catch (const std::exception&) {
        throw ValidationError("potential: bad argument '" + item + "' in '" + text + "'");
      }
    }
  }
  auto arg = [&](size_t i, Scalar def) { return i < args.size() ? args[i] : def; };
  if (name == "harmonic") {
    if (dims == 1) return Harmonic1D<Scalar>{arg(0, 1)};
    return Harmonic2D<Scalar>{arg(0, 1), arg(1, arg(0, 1))};
  }
  if (name == "latticeA") return LatticeA<Scalar>{arg(0, 24)};
  if (name == "latticeB") return LatticeB<Scalar>{arg(0, 1), arg(1, 5)};
  throw ValidationError("potential: unknown potential '" + text + "'");
}

template <typename Scalar>
std::string potential_name(const PotentialSpec<Scalar>& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Harmonic1D<Scalar>>)
          os << "harmonic(" << p.omega << ")";
        else if constexpr (std::is_same_v<P, Harmonic2D<Scalar>>)
          os << "harmonic(" << p.omega_x << "," << p.omega_y << ")";
        else if constexpr (std::is_same_v<P, LatticeA<Scalar>>)
          os << "latticeA(" << p.depth << ")";
        else if constexpr (std::is_same_v<P, LatticeB<Scalar>>)
          os << "latticeB(" << p.depth << "," << p.aspect << ")";
        else
          os << "custom";
      },
      spec);
  return os.str();
}

using PotentialSpecD = PotentialSpec<double>;

}  // namespace gpstate

#endif  // GPSTATE_POTENTIAL_HPP
