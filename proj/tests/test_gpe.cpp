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

#include <gtest/gtest.h>

#include <random>

#include "gpstate/gpe.hpp"
#include "oracles.hpp"

using namespace gpstate;
using cplx = std::complex<double>;

namespace {

RealArray<double> oscillator_state(const GridD& g) {
  return std::pow(std::numbers::pi, -0.25) * (-0.5 * g.x_mesh().square()).exp();
}

ComplexArray<double> random_state(const GridD& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  ComplexArray<double> a(g.nx(), g.ny());
  for (Index i = 0; i < a.size(); ++i) a(i) = cplx(u(rng), u(rng));
  return a;
}

ComplexArray<double> as_complex(const RealArray<double>& a) { return a.cast<cplx>(); }

}  // namespace

TEST(IteStep, OscillatorGroundStateIsStationary) {
  const auto g = make_grid_1d(-12.0, 12.0, 512);
  const FieldD psi = FieldD::from_real(g, oscillator_state(*g));
  const auto out = ite_step_single(psi, SingleProblemD{g, Harmonic1D<double>{1}, 0.0}, 1e-3);
  EXPECT_LT((out.values - psi.values).abs().maxCoeff(), 1e-6);
}

TEST(IteStep, ZeroStepIsIdentityAndOutputIsNormalized) {
  const auto g = make_grid_1d(-6.0, 6.0, 64);
  const SingleProblemD p{g, Harmonic1D<double>{1}, 25.0};
  const auto psi = normalize_l2(FieldD(g, random_state(*g, 1)));
  EXPECT_LT((ite_step_single(psi, p, 0.0).values - psi.values).abs().maxCoeff(), 1e-14);
  const auto out = ite_step_single(FieldD(g, random_state(*g, 2)), p, 1e-2);
  EXPECT_NEAR(l2_norm_sq(out), 1.0, 1e-12);

  const TwoComponentProblemD tp{g, Harmonic1D<double>{1}, Harmonic1D<double>{1}, 10, 5, 8, -1};
  const auto two = normalize_l2(TwoComponentFieldD(g, random_state(*g, 3), random_state(*g, 4)));
  const auto same = ite_step_two(two, tp, 0.0);
  EXPECT_LT((same.first - two.first).abs().maxCoeff(), 1e-14);
  EXPECT_LT((same.second - two.second).abs().maxCoeff(), 1e-14);
  EXPECT_NEAR(l2_norm_sq(ite_step_two(two, tp, 1e-2)), 1.0, 1e-12);
}

TEST(IteStep, DecoupledEmptyComponentStaysEmpty) {
  const auto g = make_grid_1d(-6.0, 6.0, 64);
  const double g11 = 30.0;
  const TwoComponentProblemD tp{g, Harmonic1D<double>{1}, Harmonic1D<double>{1}, g11, 0.0, 7.0, 0.0};
  const SingleProblemD sp{g, Harmonic1D<double>{1}, g11};
  FieldD one = normalize_l2(FieldD(g, random_state(*g, 5)));
  TwoComponentFieldD two(g, one.values, ComplexArray<double>::Zero(64, 1));
  for (int s = 0; s < 50; ++s) {
    one = ite_step_single(one, sp, 1e-3);
    two = ite_step_two(two, tp, 1e-3);
  }
  EXPECT_TRUE((two.second == cplx(0)).all());
  EXPECT_TRUE((two.first == one.values).all());  // bit-compatible
}

TEST(IteStep, SymmetricProblemKeepsComponentsEqual) {
  const auto g = make_grid_1d(-6.0, 6.0, 64);
  const TwoComponentProblemD tp{g, LatticeA<double>{24}, LatticeA<double>{24}, 50, 20, 50, -2};
  const auto a = random_state(*g, 6);
  TwoComponentFieldD f = normalize_l2(TwoComponentFieldD(g, a, a));
  for (int s = 0; s < 20; ++s) {
    f = ite_step_two(f, tp, 1e-3);
    EXPECT_LT((f.first - f.second).abs().maxCoeff(), 1e-12);
  }
}

TEST(Rabi, InvariantsOfTheImaginaryTimeFactor) {
  const auto g = make_grid_1d(-3.0, 3.0, 16);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  RealArray<double> ra(16, 1), rb(16, 1);
  for (Index i = 0; i < 16; ++i) ra(i) = u(rng), rb(i) = u(rng);
  const double dtau = 0.05, omega = -3.0;
  // Real fields: |psi1|^2 - |psi2|^2 is preserved pointwise (cosh^2 - sinh^2 = 1).
  ComplexArray<double> a = as_complex(ra), b = as_complex(rb);
  rabi_mix(a, b, dtau, omega);
  EXPECT_LT(((a.abs2() - b.abs2()) - (ra.square() - rb.square())).abs().maxCoeff(), 1e-14);
  // Symmetric and antisymmetric states are eigenvectors with factors e^{-+dtau*omega/2}.
  ComplexArray<double> s1 = as_complex(ra), s2 = as_complex(ra);
  rabi_mix(s1, s2, dtau, omega);
  EXPECT_LT((s1.abs2() + s2.abs2() - std::exp(-dtau * omega) * 2.0 * ra.square()).abs().maxCoeff(), 1e-13);
  ComplexArray<double> t1 = as_complex(ra), t2 = as_complex(-ra);
  rabi_mix(t1, t2, dtau, omega);
  EXPECT_LT((t1.abs2() + t2.abs2() - std::exp(dtau * omega) * 2.0 * ra.square()).abs().maxCoeff(), 1e-13);
}

TEST(Energy, OscillatorAndConstantPotential) {
  const auto g = make_grid_1d(-12.0, 12.0, 512);
  const auto psi = FieldD::from_real(g, oscillator_state(*g));
  EXPECT_NEAR(energy_single(psi, SingleProblemD{g, Harmonic1D<double>{1}, 0.0}), 0.5, 1e-12);

  const auto flat = FieldD(g, ComplexArray<double>::Constant(512, 1, 0.3));
  const SingleProblemD c{g, CustomPotential<double>{RealArray<double>::Constant(512, 1, 2.5)}, 0.0};
  EXPECT_NEAR(energy_single(flat, c), 2.5, 1e-12);
}

TEST(Energy, QuotientAndFunctionalDifferByHalfInteraction) {
  const auto g = make_grid_1d(-8.0, 8.0, 128);
  const SingleProblemD p{g, Harmonic1D<double>{1}, 40.0};
  const auto psi = normalize_l2(FieldD::from_real(g, (-0.2 * g->x_mesh().square()).exp()));
  const auto t = energy_terms(psi, p);
  const RealArray<double> n = psi.values.abs2();
  // Interaction recomputed directly from the density.
  EXPECT_NEAR(t.interaction, 40.0 * n.square().sum() * g->dx(), 1e-12);
  EXPECT_NEAR(t.quotient() - t.functional(), 0.5 * t.interaction, 1e-12);
  EXPECT_THROW(energy_single(FieldD::zeros(g), p), DegenerateFieldError);
}

TEST(Energy, RabiTermShiftsByOverlap) {
  const auto g = make_grid_1d(-8.0, 8.0, 64);
  const RealArray<double> phi = (-0.5 * g->x_mesh().square()).exp();
  const auto f = normalize_l2(TwoComponentFieldD(g, as_complex(phi), as_complex(0.5 * phi)));
  TwoComponentProblemD p{g, Harmonic1D<double>{1}, Harmonic1D<double>{1}, 5, 3, 4, 0.0};
  const double e0 = energy_two(f, p);
  p.omega = -1.5;
  const double overlap = (f.first.real() * f.second.real()).sum() * g->dx();
  EXPECT_GT(overlap, 0.0);
  EXPECT_NEAR(energy_two(f, p) - e0, -1.5 * overlap, 1e-12);
}

TEST(Solve, LinearOscillator) {
  const auto g = make_grid_1d(-12.0, 12.0, 512);
  EvolutionConfigD cfg;
  cfg.iterations = 5000;
  const auto gs = solve_ground_single(SingleProblemD{g, Harmonic1D<double>{1}, 0.0}, cfg);
  EXPECT_NEAR(gs.energy(), 0.5, 5e-4);
  EXPECT_EQ(gs.iterations, 5000);
  EXPECT_EQ(gs.trace.front().iteration, 0);
  EXPECT_EQ(gs.trace.back().iteration, 5000);
  EXPECT_EQ(gs.trace.size(), 51u);
  EXPECT_GE(gs.field.values.real().minCoeff(), 0.0);
  EXPECT_EQ(gs.field.values.imag().abs().maxCoeff(), 0.0);
}

TEST(Solve, EarlyStopAndConvergenceFlag) {
  const auto g = make_grid_1d(-8.0, 8.0, 128);
  EvolutionConfigD cfg;
  cfg.dtau = 5e-3;
  cfg.iterations = 200000;
  cfg.tolerance = 1e-10;
  const auto gs = solve_ground_single(SingleProblemD{g, LatticeA<double>{24}, 10.0}, cfg);
  EXPECT_TRUE(gs.converged);
  EXPECT_LT(gs.iterations, 200000);
  EXPECT_EQ(gs.iterations % 100, 0);
}

namespace {

// Largest per-step rise of the chosen energy after `warmup` steps.
double max_energy_rise(const SingleProblemD& p, bool quotient, int steps, int warmup) {
  SingleEvolver<double> ev(p, 1e-3);
  ComplexArray<double> psi = gaussian_profile(*p.grid).cast<cplx>();
  psi /= std::sqrt(psi.abs2().sum() * p.grid->cell_volume());
  auto energy = [&] {
    const auto t = ev.terms(psi);
    return quotient ? t.quotient() : t.functional();
  };
  double prev = energy(), rise = 0.0;
  for (int s = 1; s <= steps; ++s) {
    ev.step(psi);
    const double e = energy();
    if (s > warmup) rise = std::max(rise, e - prev);
    prev = e;
  }
  return rise;
}

}  // namespace

TEST(Solve, QuotientTraceIsMonotoneInHarmonicTrap) {
  const auto g = make_grid_1d(-10.0, 10.0, 128);
  for (double gg : {0.0, 10.0, 100.0})
    EXPECT_LE(max_energy_rise(SingleProblemD{g, Harmonic1D<double>{1}, gg}, true, 3000, 10), 1e-9) << gg;
}

TEST(Solve, FunctionalTraceIsMonotoneInLattice) {
  // In the lattice the quotient (a chemical potential) can rise transiently;
  // the energy functional is the quantity imaginary time lowers.
  const auto g = make_grid_1d(-10.0, 10.0, 128);
  for (double gg : {0.0, 10.0, 100.0})
    EXPECT_LE(max_energy_rise(SingleProblemD{g, LatticeA<double>{24}, gg}, false, 3000, 10), 1e-9) << gg;
  EXPECT_LE(max_energy_rise(SingleProblemD{g, LatticeA<double>{24}, 0.0}, true, 3000, 10), 1e-9);
}

TEST(Solve, MatchesDenseDiagonalization) {
  const int n = 64;
  const auto g = make_grid_1d(-8.0, 8.0, n);
  const SingleProblemD p{g, LatticeA<double>{24}, 0.0};
  const auto v = evaluate_potential(p.potential, *g);
  Eigen::MatrixXd h = oracle::spectral_kinetic_matrix(n, g->dx());
  h.diagonal() += Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  const auto ref = oracle::lowest_eigenpair(h);

  EvolutionConfigD cfg;
  cfg.dtau = 1e-3;
  cfg.iterations = 40000;
  const auto gs = solve_ground_single(p, cfg);
  const Eigen::ArrayXd dens_ite = gs.field.values.abs2().col(0);
  const Eigen::ArrayXd dens_ref = ref.vector.array().square() / g->dx();
  EXPECT_LT((dens_ite - dens_ref).abs().maxCoeff(), 1e-5);
  EXPECT_NEAR(gs.energy(), ref.value, 1e-5);
}

TEST(Solve, SplittingBiasIsSecondOrder) {
  const int n = 64;
  const auto g = make_grid_1d(-8.0, 8.0, n);
  const SingleProblemD p{g, LatticeA<double>{24}, 0.0};
  const auto v = evaluate_potential(p.potential, *g);
  Eigen::MatrixXd h = oracle::spectral_kinetic_matrix(n, g->dx());
  h.diagonal() += Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  const double exact = oracle::lowest_eigenpair(h).value;
  const Eigen::VectorXd ref = oracle::lowest_eigenpair(h).vector / std::sqrt(g->dx());
  struct Errors {
    double energy, state;
  };
  auto errors = [&](double dtau) {
    EvolutionConfigD cfg;
    cfg.dtau = dtau;
    cfg.iterations = static_cast<long>(40.0 / dtau);
    const auto gs = solve_ground_single(p, cfg);
    const Eigen::ArrayXd psi = gs.field.values.real().col(0);
    return Errors{gs.energy() - exact, (psi - ref.array()).abs().maxCoeff()};
  };
  const auto coarse = errors(0.02), fine = errors(0.01);
  // Strang splitting: the state error is second order. The quotient is
  // variational, so its bias is quadratic in the state error.
  EXPECT_GT(coarse.energy, 0.0);
  EXPECT_GT(fine.energy, 0.0);
  EXPECT_GT(coarse.state / fine.state, 3.5);
  EXPECT_LT(coarse.state / fine.state, 4.5);
  EXPECT_GT(coarse.energy / fine.energy, 4.0);
}

TEST(Solve, OverflowAbortsWithIterationIndex) {
  const auto g = make_grid_1d(-4.0, 4.0, 32);
  const SingleProblemD p{g, CustomPotential<double>{RealArray<double>::Constant(32, 1, -1e6)}, 0.0};
  EvolutionConfigD cfg;
  cfg.iterations = 10;
  try {
    solve_ground_single(p, cfg);
    FAIL() << "expected a numerical failure";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos) << e.what();
  }
}

TEST(Solve, ConfigValidation) {
  const auto g = make_grid_1d(-4.0, 4.0, 32);
  const SingleProblemD p{g, Harmonic1D<double>{1}, 0.0};
  EvolutionConfigD cfg;
  cfg.dtau = 0;
  EXPECT_THROW(solve_ground_single(p, cfg), ValidationError);
  cfg = {};
  cfg.iterations = 0;
  EXPECT_THROW(solve_ground_single(p, cfg), ValidationError);
  cfg = {};
  cfg.tolerance = -1.0;
  EXPECT_THROW(solve_ground_single(p, cfg), ValidationError);
  cfg = {};
  cfg.dtau = 10.0;  // dtau * max V = 80
  EXPECT_THROW(solve_ground_single(p, cfg), ValidationError);
  EXPECT_THROW(solve_ground_single(SingleProblemD{g, Harmonic1D<double>{1}, std::nan("")}, EvolutionConfigD{}),
               ValidationError);
}

TEST(TwoComponent, DecouplingMatchesSingleSolve) {
  const auto g = make_grid_1d(-10.0, 10.0, 128);
  EvolutionConfigD cfg;
  cfg.iterations = 8000;
  const double gg = 60.0;
  const auto two = solve_ground_two(
      TwoComponentProblemD{g, Harmonic1D<double>{1}, Harmonic1D<double>{1}, gg, 0.0, gg, 0.0}, cfg);
  // Each component carries half the norm, so it feels the coupling g/2.
  const auto one = solve_ground_single(SingleProblemD{g, Harmonic1D<double>{1}, gg / 2}, cfg);
  EXPECT_NEAR(two.energy(), one.energy(), 1e-6);
  EXPECT_LT((two.field.first.real() * std::sqrt(2.0) - one.field.values.real()).abs().maxCoeff(), 1e-6);
}

TEST(TwoComponent, SwapSymmetry) {
  const auto g = make_grid_1d(-8.0, 8.0, 128);
  EvolutionConfigD cfg;
  cfg.iterations = 3000;
  const TwoComponentProblemD p{g, LatticeA<double>{24}, Harmonic1D<double>{1.2}, 103, 100, 97, -1};
  const auto a = solve_ground_two(p, cfg);
  const auto b = solve_ground_two(swapped(p), cfg);
  EXPECT_NEAR(a.energy(), b.energy(), 1e-10);
  EXPECT_LT((a.field.first - b.field.second).abs().maxCoeff(), 1e-10);
}

TEST(TwoComponent, WeakerSelfInteractionDominates) {
  const auto g = make_grid_1d(-8.0, 8.0, 128);
  EvolutionConfigD cfg;
  cfg.iterations = 10000;
  const auto gs = solve_ground_two(
      TwoComponentProblemD{g, LatticeA<double>{24}, LatticeA<double>{24}, 103, 100, 97, -1}, cfg);
  EXPECT_GT(gs.field.second.abs2().sum(), gs.field.first.abs2().sum());
  EXPECT_NEAR(l2_norm_sq(gs.field), 1.0, 1e-12);
  EXPECT_GE(gs.field.first.real().minCoeff(), 0.0);
  EXPECT_GE(gs.field.second.real().minCoeff(), 0.0);
}
