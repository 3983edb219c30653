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

#ifndef GPSTATE_GPE_HPP
#define GPSTATE_GPE_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpstate/grid.hpp"
#include "gpstate/potential.hpp"
#include "gpstate/spectral.hpp"

namespace gpstate {

template <typename Scalar>
struct SingleProblem {
  GridPtr<Scalar> grid;
  PotentialSpec<Scalar> potential = Harmonic1D<Scalar>{};
  Scalar g = Scalar(0);
};

template <typename Scalar>
struct TwoComponentProblem {
  GridPtr<Scalar> grid;
  PotentialSpec<Scalar> potential1 = Harmonic1D<Scalar>{};
  PotentialSpec<Scalar> potential2 = Harmonic1D<Scalar>{};
  Scalar g11 = Scalar(0);
  Scalar g12 = Scalar(0);
  Scalar g22 = Scalar(0);
  Scalar omega = Scalar(0);
};

/// Relabels the components: psi1 <-> psi2, g11 <-> g22, V1 <-> V2.
template <typename Scalar>
TwoComponentProblem<Scalar> swapped(const TwoComponentProblem<Scalar>& p) {
  auto q = p;
  std::swap(q.potential1, q.potential2);
  std::swap(q.g11, q.g22);
  return q;
}

template <typename Scalar>
struct EvolutionConfig {
  Scalar dtau = Scalar(1e-3);
  long iterations = 1000;
  // Stop once |E_n - E_{n-100}| falls below this.
  std::optional<Scalar> tolerance;
  // Energy trace cadence in iterations.
  long snapshot_every = 100;
  // Starting state; the normalized Gaussian exp(-|r|^2/2) when empty.
  std::optional<ComplexArray<Scalar>> initial;
  std::optional<ComplexArray<Scalar>> initial_second;
};

template <typename Scalar>
struct EnergySnapshot {
  long iteration;
  Scalar energy;
};

/// Expectation values of the Hamiltonian pieces (not divided by the norm).
template <typename Scalar>
struct EnergyTerms {
  Scalar kinetic = 0;
  Scalar potential = 0;
  Scalar interaction = 0;
  Scalar rabi = 0;
  Scalar norm = 0;

  /// <psi|H|psi>/<psi|psi> with the full interaction term (chemical potential).
  Scalar quotient() const { return (kinetic + potential + interaction + rabi) / norm; }
  /// Gross-Pitaevskii energy functional: interaction carries a factor 1/2.
  Scalar functional() const {
    return (kinetic + potential + Scalar(0.5) * interaction + rabi) / norm;
  }
};

template <typename Scalar>
struct GroundState {
  Field<Scalar> field;
  std::vector<EnergySnapshot<Scalar>> trace;
  long iterations = 0;
  bool converged = false;
  EnergyTerms<Scalar> terms;
  Scalar energy() const { return terms.quotient(); }
};

template <typename Scalar>
struct TwoComponentGroundState {
  TwoComponentField<Scalar> field;
  std::vector<EnergySnapshot<Scalar>> trace;
  long iterations = 0;
  bool converged = false;
  EnergyTerms<Scalar> terms;
  Scalar energy() const { return terms.quotient(); }
};

template <typename Scalar>
RealArray<Scalar> gaussian_profile(const Grid<Scalar>& grid) {
  RealArray<Scalar> r2 = grid.x_mesh().square();
  if (grid.dims() == 2) r2 += grid.y_mesh().square();
  return (Scalar(-0.5) * r2).exp();
}

namespace detail {

template <typename Scalar>
constexpr Scalar kMinExponent = Scalar(-700);

template <typename Scalar>
Scalar kinetic_expectation(const ComplexArray<Scalar>& psi, const RealArray<Scalar>& half_k2,
                           const Grid<Scalar>& grid, SpectralWorkspace<Scalar>& ws) {
  ComplexArray<Scalar> hat = psi;
  ws.forward(hat);
  // Parseval: sum |psi|^2 = (1/N) sum |psi_hat|^2.
  return (half_k2 * hat.abs2()).sum() * grid.cell_volume() / Scalar(grid.size());
}

/// Phase of the sample with the largest magnitude in `ref`.
template <typename Scalar>
std::complex<Scalar> phase_at_peak(const ComplexArray<Scalar>& ref) {
  Index i = 0, j = 0;
  ref.abs2().maxCoeff(&i, &j);
  const auto z = ref(i, j);
  const Scalar m = std::abs(z);
  return m > Scalar(0) ? z / m : std::complex<Scalar>(1);
}

template <typename Scalar>
ComplexArray<Scalar> to_real_nonnegative(const ComplexArray<Scalar>& a, std::complex<Scalar> phase) {
  RealArray<Scalar> re = (a * std::conj(phase)).real();
  re = (re < Scalar(0) && re > Scalar(-1e-8)).select(Scalar(0), re);
  return re.template cast<std::complex<Scalar>>();
}

template <typename Scalar>
void validate_config(const EvolutionConfig<Scalar>& config, Scalar max_potential) {
  if (!(config.dtau > Scalar(0)) || !std::isfinite(config.dtau))
    throw ValidationError("solver: dtau must be positive and finite");
  if (config.iterations <= 0) throw ValidationError("solver: iterations must be positive");
  if (config.snapshot_every <= 0) throw ValidationError("solver: snapshot_every must be positive");
  if (config.tolerance && !(*config.tolerance > Scalar(0)))
    throw ValidationError("solver: tolerance must be positive");
  if (!(config.dtau * max_potential < Scalar(50)))
    throw ValidationError("solver: dtau * max(V) must stay below 50");
}

}  // namespace detail

/// Split-step imaginary-time propagator for one component.
///
/// A step is half kinetic, full exp(-dtau (V + g|psi|^2)) with the density
/// taken at the start of the step, half kinetic, then L2 renormalization.
template <typename Scalar>
class SingleEvolver {
 public:
  SingleEvolver(const SingleProblem<Scalar>& problem, Scalar dtau)
      : grid_(problem.grid),
        g_(problem.g),
        dtau_(dtau),
        potential_(evaluate_potential(problem.potential, *problem.grid)),
        half_k2_(Scalar(0.5) * problem.grid->k_squared()),
        half_kinetic_(make_kinetic_propagator(problem.grid, dtau / Scalar(2))) {
    if (!std::isfinite(g_)) throw ValidationError("problem: g must be finite");
  }

  void step(ComplexArray<Scalar>& psi) {
    density_ = psi.abs2();
    apply_kinetic_inplace(psi, half_kinetic_, ws_);
    factor_ = (-dtau_ * (potential_ + g_ * density_)).max(detail::kMinExponent<Scalar>).exp();
    psi *= factor_.template cast<std::complex<Scalar>>();
    apply_kinetic_inplace(psi, half_kinetic_, ws_);
    const Scalar norm = detail::checked_norm(psi.abs2().sum() * grid_->cell_volume(), "ite_step");
    psi /= norm;
  }

  EnergyTerms<Scalar> terms(const ComplexArray<Scalar>& psi) {
    const RealArray<Scalar> n = psi.abs2();
    const Scalar dv = grid_->cell_volume();
    EnergyTerms<Scalar> t;
    t.norm = n.sum() * dv;
    t.kinetic = detail::kinetic_expectation(psi, half_k2_, *grid_, ws_);
    t.potential = (potential_ * n).sum() * dv;
    t.interaction = g_ * n.square().sum() * dv;
    return t;
  }

  const RealArray<Scalar>& potential() const { return potential_; }

 private:
  GridPtr<Scalar> grid_;
  Scalar g_;
  Scalar dtau_;
  RealArray<Scalar> potential_;
  RealArray<Scalar> half_k2_;
  KineticPropagator<Scalar> half_kinetic_;
  SpectralWorkspace<Scalar> ws_;
  RealArray<Scalar> density_;
  RealArray<Scalar> factor_;
};

/// Applies exp(-dtau * (omega/2) * sigma_x) pointwise.
template <typename Scalar>
void rabi_mix(ComplexArray<Scalar>& first, ComplexArray<Scalar>& second, Scalar dtau, Scalar omega) {
  const Scalar a = dtau * omega / Scalar(2);
  const Scalar c = std::cosh(a);
  const Scalar s = std::sinh(a);
  ComplexArray<Scalar> mixed_first = c * first - s * second;
  second = c * second - s * first;
  first = std::move(mixed_first);
}

/// Split-step imaginary-time propagator for two Rabi-coupled components.
template <typename Scalar>
class TwoComponentEvolver {
 public:
  TwoComponentEvolver(const TwoComponentProblem<Scalar>& problem, Scalar dtau)
      : grid_(problem.grid),
        problem_(problem),
        dtau_(dtau),
        potential1_(evaluate_potential(problem.potential1, *problem.grid)),
        potential2_(evaluate_potential(problem.potential2, *problem.grid)),
        half_k2_(Scalar(0.5) * problem.grid->k_squared()),
        half_kinetic_(make_kinetic_propagator(problem.grid, dtau / Scalar(2))) {
    for (Scalar c : {problem.g11, problem.g12, problem.g22, problem.omega})
      if (!std::isfinite(c)) throw ValidationError("problem: coefficients must be finite");
  }

  void step(ComplexArray<Scalar>& first, ComplexArray<Scalar>& second) {
    const auto& p = problem_;
    n1_ = first.abs2();
    n2_ = second.abs2();
    apply_kinetic_inplace(first, half_kinetic_, ws_);
    apply_kinetic_inplace(second, half_kinetic_, ws_);
    factor_ = (-dtau_ * ((potential1_ + p.g11 * n1_) + p.g12 * n2_))
                  .max(detail::kMinExponent<Scalar>)
                  .exp();
    first *= factor_.template cast<std::complex<Scalar>>();
    factor_ = (-dtau_ * ((potential2_ + p.g22 * n2_) + p.g12 * n1_))
                  .max(detail::kMinExponent<Scalar>)
                  .exp();
    second *= factor_.template cast<std::complex<Scalar>>();
    if (p.omega != Scalar(0)) rabi_mix(first, second, dtau_, p.omega);
    apply_kinetic_inplace(first, half_kinetic_, ws_);
    apply_kinetic_inplace(second, half_kinetic_, ws_);
    const Scalar norm = detail::checked_norm(
        (first.abs2().sum() + second.abs2().sum()) * grid_->cell_volume(), "ite_step");
    first /= norm;
    second /= norm;
  }

  EnergyTerms<Scalar> terms(const ComplexArray<Scalar>& first, const ComplexArray<Scalar>& second) {
    const auto& p = problem_;
    const RealArray<Scalar> n1 = first.abs2();
    const RealArray<Scalar> n2 = second.abs2();
    const Scalar dv = grid_->cell_volume();
    EnergyTerms<Scalar> t;
    t.norm = (n1.sum() + n2.sum()) * dv;
    t.kinetic = detail::kinetic_expectation(first, half_k2_, *grid_, ws_) +
                detail::kinetic_expectation(second, half_k2_, *grid_, ws_);
    t.potential = ((potential1_ * n1).sum() + (potential2_ * n2).sum()) * dv;
    // Each H_i carries its own g12 cross term, so it appears twice.
    t.interaction = (p.g11 * n1.square().sum() + p.g22 * n2.square().sum() +
                     Scalar(2) * p.g12 * (n1 * n2).sum()) *
                    dv;
    t.rabi = p.omega * (first.conjugate() * second).real().sum() * dv;
    return t;
  }

 private:
  GridPtr<Scalar> grid_;
  TwoComponentProblem<Scalar> problem_;
  Scalar dtau_;
  RealArray<Scalar> potential1_;
  RealArray<Scalar> potential2_;
  RealArray<Scalar> half_k2_;
  KineticPropagator<Scalar> half_kinetic_;
  SpectralWorkspace<Scalar> ws_;
  RealArray<Scalar> n1_, n2_, factor_;
};

/// One normalized imaginary-time step. dtau = 0 is allowed and is the identity
/// up to transform round-off.
template <typename Scalar>
Field<Scalar> ite_step_single(const Field<Scalar>& field, const SingleProblem<Scalar>& problem,
                              Scalar dtau) {
  require_same_grid(*field.grid, *problem.grid, "ite_step_single");
  SingleEvolver<Scalar> evolver(problem, dtau);
  ComplexArray<Scalar> psi = field.values;
  evolver.step(psi);
  return Field<Scalar>(field.grid, std::move(psi));
}

template <typename Scalar>
TwoComponentField<Scalar> ite_step_two(const TwoComponentField<Scalar>& fields,
                                       const TwoComponentProblem<Scalar>& problem, Scalar dtau) {
  require_same_grid(*fields.grid, *problem.grid, "ite_step_two");
  TwoComponentEvolver<Scalar> evolver(problem, dtau);
  ComplexArray<Scalar> a = fields.first;
  ComplexArray<Scalar> b = fields.second;
  evolver.step(a, b);
  return TwoComponentField<Scalar>(fields.grid, std::move(a), std::move(b));
}

template <typename Scalar>
EnergyTerms<Scalar> energy_terms(const Field<Scalar>& field, const SingleProblem<Scalar>& problem) {
  require_same_grid(*field.grid, *problem.grid, "energy_single");
  SingleEvolver<Scalar> evolver(problem, Scalar(0));
  auto t = evolver.terms(field.values);
  if (!(t.norm >= kDegenerateNorm<Scalar>))
    throw DegenerateFieldError("energy_single: degenerate field");
  return t;
}

template <typename Scalar>
EnergyTerms<Scalar> energy_terms(const TwoComponentField<Scalar>& fields,
                                 const TwoComponentProblem<Scalar>& problem) {
  require_same_grid(*fields.grid, *problem.grid, "energy_two");
  TwoComponentEvolver<Scalar> evolver(problem, Scalar(0));
  auto t = evolver.terms(fields.first, fields.second);
  if (!(t.norm >= kDegenerateNorm<Scalar>))
    throw DegenerateFieldError("energy_two: degenerate field");
  return t;
}

/// <psi|H|psi>/<psi|psi> with H = T + V + g|psi|^2.
template <typename Scalar>
Scalar energy_single(const Field<Scalar>& field, const SingleProblem<Scalar>& problem) {
  return energy_terms(field, problem).quotient();
}

/// Two-component quotient: sum_i <psi_i|H_i|psi_i> + omega Re<psi1|psi2>, over the joint norm.
template <typename Scalar>
Scalar energy_two(const TwoComponentField<Scalar>& fields, const TwoComponentProblem<Scalar>& problem) {
  return energy_terms(fields, problem).quotient();
}

namespace detail {

// Shared driver: energy trace, early stopping, NaN reporting.
template <typename Scalar, typename StepFn, typename EnergyFn>
void run_evolution(const EvolutionConfig<Scalar>& config, StepFn&& step, EnergyFn&& energy,
                   std::vector<EnergySnapshot<Scalar>>& trace, long& done, bool& converged) {
  constexpr long kWindow = 100;
  Scalar previous = energy();
  trace.push_back({0, previous});
  done = 0;
  converged = false;
  for (long it = 1; it <= config.iterations; ++it) {
    try {
      step();
    } catch (const DegenerateFieldError& e) {
      throw DegenerateFieldError(std::string(e.what()) + " at iteration " + std::to_string(it));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(it));
    }
    done = it;
    const bool window = config.tolerance && it % kWindow == 0;
    const bool snap = it % config.snapshot_every == 0;
    if (!window && !snap && it != config.iterations) continue;
    const Scalar e = energy();
    if (!std::isfinite(e))
      throw NumericalError("solver: non-finite energy at iteration " + std::to_string(it));
    if (snap || it == config.iterations) trace.push_back({it, e});
    if (window) {
      if (std::abs(e - previous) < *config.tolerance) {
        converged = true;
        if (!snap && it != config.iterations) trace.push_back({it, e});
        return;
      }
      previous = e;
    }
  }
}

}  // namespace detail

/// Imaginary-time evolution to the single-component ground state.
///
/// The returned field is phase-fixed to real, non-negative values.
template <typename Scalar>
GroundState<Scalar> solve_ground_single(const SingleProblem<Scalar>& problem,
                                        const EvolutionConfig<Scalar>& config) {
  SingleEvolver<Scalar> evolver(problem, config.dtau);
  detail::validate_config(config, evolver.potential().maxCoeff());
  const auto& grid = problem.grid;
  ComplexArray<Scalar> psi;
  if (config.initial) {
    psi = *config.initial;
    if (psi.rows() != grid->nx() || psi.cols() != grid->ny())
      throw ValidationError("solver: initial state shape mismatch");
  } else {
    psi = gaussian_profile(*grid).template cast<std::complex<Scalar>>();
  }
  psi /= detail::checked_norm(psi.abs2().sum() * grid->cell_volume(), "solver initial state");

  GroundState<Scalar> out{Field<Scalar>::zeros(grid), {}, 0, false, {}};
  detail::run_evolution(
      config, [&] { evolver.step(psi); }, [&] { return evolver.terms(psi).quotient(); }, out.trace,
      out.iterations, out.converged);
  psi = detail::to_real_nonnegative(psi, detail::phase_at_peak(psi));
  out.terms = evolver.terms(psi);
  out.field = Field<Scalar>(grid, std::move(psi));
  return out;
}

template <typename Scalar>
TwoComponentGroundState<Scalar> solve_ground_two(const TwoComponentProblem<Scalar>& problem,
                                                 const EvolutionConfig<Scalar>& config) {
  TwoComponentEvolver<Scalar> evolver(problem, config.dtau);
  const auto& grid = problem.grid;
  const Scalar vmax = std::max(evaluate_potential(problem.potential1, *grid).maxCoeff(),
                               evaluate_potential(problem.potential2, *grid).maxCoeff());
  detail::validate_config(config, vmax);
  ComplexArray<Scalar> a, b;
  const ComplexArray<Scalar> gauss = gaussian_profile(*grid).template cast<std::complex<Scalar>>();
  a = config.initial ? *config.initial : gauss;
  b = config.initial_second ? *config.initial_second : gauss;
  if (a.rows() != grid->nx() || a.cols() != grid->ny() || b.rows() != grid->nx() ||
      b.cols() != grid->ny())
    throw ValidationError("solver: initial state shape mismatch");
  const Scalar n0 = detail::checked_norm((a.abs2().sum() + b.abs2().sum()) * grid->cell_volume(),
                                         "solver initial state");
  a /= n0;
  b /= n0;

  TwoComponentGroundState<Scalar> out{
      TwoComponentField<Scalar>(grid, ComplexArray<Scalar>::Zero(grid->nx(), grid->ny()),
                                ComplexArray<Scalar>::Zero(grid->nx(), grid->ny())),
      {}, 0, false, {}};
  detail::run_evolution(
      config, [&] { evolver.step(a, b); }, [&] { return evolver.terms(a, b).quotient(); },
      out.trace, out.iterations, out.converged);
  // One global phase, taken from the dominant component at the total-density peak.
  Index i = 0, j = 0;
  (a.abs2() + b.abs2()).maxCoeff(&i, &j);
  const auto& ref = std::abs(a(i, j)) >= std::abs(b(i, j)) ? a : b;
  const auto z = ref(i, j);
  const std::complex<Scalar> phase = std::abs(z) > Scalar(0) ? z / std::abs(z) : std::complex<Scalar>(1);
  a = detail::to_real_nonnegative(a, phase);
  b = detail::to_real_nonnegative(b, phase);
  out.terms = evolver.terms(a, b);
  out.field = TwoComponentField<Scalar>(grid, std::move(a), std::move(b));
  return out;
}

using SingleProblemD = SingleProblem<double>;
using TwoComponentProblemD = TwoComponentProblem<double>;
using EvolutionConfigD = EvolutionConfig<double>;

}  // namespace gpstate

#endif  // GPSTATE_GPE_HPP
