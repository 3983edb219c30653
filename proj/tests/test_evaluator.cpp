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

#include <algorithm>
#include <random>

#include "gpstate/evaluator.hpp"
#include "gpstate/trainer.hpp"

using namespace gpstate;

namespace {

EvolutionConfigD solver(long iterations) {
  EvolutionConfigD c;
  c.iterations = iterations;
  return c;
}

const Dataset& single_data() {
  static const Dataset d = generate_dataset(
      {"g", {{0.0, 50.0, 6}}, 0}, SingleProblemD{make_grid_1d(-12.0, 12.0, 64), Harmonic1D<double>{1}, 0.0},
      solver(800), 1);
  return d;
}

const Dataset& two_data() {
  static const Dataset d = generate_dataset(
      {"omega", {{-1.0, -0.1, 4}}, 0},
      TwoComponentProblemD{make_grid_1d(-8.0, 8.0, 64), LatticeA<double>{24}, LatticeA<double>{24}, 103, 100, 97, -1},
      solver(600), 1);
  return d;
}

GroundStateNetD warmed_net(const Dataset& data) {
  NetConfig base;
  base.channels = 4;
  base.dilations = {1, 2, 1};
  GroundStateNetD net(fit_net_config(data, base));
  std::vector<Index> all(static_cast<size_t>(data.size()));
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  net.forward(batch_inputs(data, all), Mode::Train);
  return net;
}

std::vector<Index> iota(Index n) {
  std::vector<Index> v(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

}  // namespace

TEST(Postprocess, MaxNormalizedGaussianGivesOscillatorEnergy) {
  const auto grid = make_grid_1d(-12.0, 12.0, 128);
  const Eigen::ArrayXXd amp = (-0.5 * grid->x_mesh().square()).exp();
  const auto f = postprocess_prediction(amp, grid);
  EXPECT_NEAR(l2_norm_sq(f), 1.0, 1e-14);
  const SingleProblemD p{grid, Harmonic1D<double>{1}, 0.0};
  EXPECT_NEAR(energy_single(f, p), 0.5, 1e-10);
}

TEST(Postprocess, EnergyInvariantUnderRescaling) {
  const auto grid = make_grid_1d(-8.0, 8.0, 96);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::ArrayXXd amp(96, 1);
  for (Index i = 0; i < 96; ++i) amp(i, 0) = u(rng) * std::exp(-0.1 * grid->x()(i) * grid->x()(i));
  for (double g : {0.0, 50.0}) {
    const SingleProblemD p{grid, LatticeA<double>{24}, g};
    const double e = energy_single(postprocess_prediction(amp, grid), p);
    for (double s : {1e-3, 0.37, 0.99}) {
      const Eigen::ArrayXXd scaled = s * amp;
      EXPECT_NEAR(energy_single(postprocess_prediction(scaled, grid), p), e, 1e-12 * std::abs(e)) << g << " " << s;
    }
  }
}

TEST(Postprocess, TwoComponentsShareOneNorm) {
  const auto grid = make_grid_1d(-8.0, 8.0, 64);
  const Eigen::ArrayXXd a = (-0.5 * grid->x_mesh().square()).exp();
  const Eigen::ArrayXXd b = 0.25 * a;
  const auto f = postprocess_prediction(a, b, grid);
  EXPECT_NEAR(l2_norm_sq(f), 1.0, 1e-14);
  EXPECT_NEAR(f.second.abs().maxCoeff() / f.first.abs().maxCoeff(), 0.25, 1e-15);
}

TEST(Postprocess, RejectsDegenerateAndMalformed) {
  const auto grid = make_grid_1d(-8.0, 8.0, 32);
  EXPECT_THROW(postprocess_prediction(Eigen::ArrayXXd::Zero(32, 1), grid), DegenerateFieldError);
  EXPECT_THROW(postprocess_prediction(Eigen::ArrayXXd::Constant(32, 1, -0.1), grid), ValidationError);
  EXPECT_THROW(postprocess_prediction(Eigen::ArrayXXd::Ones(16, 1), grid), ValidationError);
}

TEST(RelativeError, StoredTargetsReproduceStoredEnergies) {
  for (const Dataset* d : {&single_data(), &two_data()})
    for (Index i = 0; i < d->size(); ++i) {
      const auto problem = problem_for_record(*d, i);
      const auto& t = d->records[static_cast<size_t>(i)].targets;
      const double e0 = d->scalar(i, provenance::kEnergy);
      const Index n = d->header.grid_size();
      double rel;
      if (const auto* s = std::get_if<SingleProblemD>(&problem)) {
        rel = relative_energy_error(postprocess_prediction(t, s->grid), *s, e0);
      } else {
        const auto& tp = std::get<TwoComponentProblemD>(problem);
        rel = relative_energy_error(postprocess_prediction(t.block(0, 0, n, 1), t.block(0, 1, n, 1), tp.grid), tp, e0);
      }
      EXPECT_LT(rel, 1e-12) << "record " << i;
    }
}

TEST(RelativeError, SolvedStateScoresZero) {
  const SingleProblemD p{make_grid_1d(-8.0, 8.0, 64), LatticeA<double>{24}, 30.0};
  const auto gs = solve_ground_single(p, solver(500));
  EXPECT_LT(relative_energy_error(gs.field, p, gs.energy()), 1e-12);
}

TEST(RelativeError, ZeroReferenceThrows) {
  const auto grid = make_grid_1d(-8.0, 8.0, 32);
  const SingleProblemD p{grid, Harmonic1D<double>{1}, 0.0};
  const auto f = postprocess_prediction(Eigen::ArrayXXd::Ones(32, 1), grid);
  EXPECT_THROW(relative_energy_error(f, p, 0.0), ValidationError);
  EXPECT_GE(relative_energy_error(f, p, 0.5), 0.0);
}

TEST(Sweep, RowsSortedAndOnePerIndex) {
  const auto& data = single_data();
  auto net = warmed_net(data);
  const std::vector<Index> idx{4, 0, 5, 2};
  const auto r = sweep_report(net, data, idx);
  ASSERT_EQ(r.rows.size(), idx.size());
  std::vector<double> want;
  for (Index i : idx) want.push_back(data.input(i, 0));
  std::sort(want.begin(), want.end());
  for (size_t k = 0; k < want.size(); ++k) {
    EXPECT_EQ(r.rows[k].param, want[k]);
    EXPECT_GE(r.rows[k].rel_err, 0.0);
    EXPECT_EQ(r.rows[k].rel_err, std::abs(r.rows[k].e_pred - r.rows[k].e_ref) / std::abs(r.rows[k].e_ref));
  }
  std::vector<double> errs;
  for (const auto& row : r.rows) errs.push_back(row.rel_err);
  std::sort(errs.begin(), errs.end());
  EXPECT_EQ(r.median_rel_err, 0.5 * (errs[1] + errs[2]));
  EXPECT_EQ(r.max_rel_err, errs.back());

  // Integral MSE matches the training loss per record.
  const auto& row = r.rows[0];
  const Index rec = 0;
  const std::vector<Index> one{rec};
  EXPECT_NEAR(row.mse, evaluate_loss(net, data, one), 1e-15);
}

TEST(Sweep, RecomputeAgreesWithProvenance) {
  const auto& data = single_data();
  auto net = warmed_net(data);
  const std::vector<Index> idx{1, 3};
  const auto stored = sweep_report(net, data, idx);
  SweepOptions opt;
  opt.recompute = true;
  const auto fresh = sweep_report(net, data, idx, opt);
  for (size_t k = 0; k < idx.size(); ++k) {
    EXPECT_NEAR(fresh.rows[k].e_ref, stored.rows[k].e_ref, 1e-12 * stored.rows[k].e_ref);
    EXPECT_EQ(fresh.rows[k].e_pred, stored.rows[k].e_pred);
  }
}

TEST(Sweep, TwoComponentReportsBothMse) {
  const auto& data = two_data();
  auto net = warmed_net(data);
  const auto r = sweep_report(net, data, iota(data.size()));
  ASSERT_EQ(r.components, 2);
  for (const auto& row : r.rows) {
    ASSERT_EQ(row.component_mse.size(), 2u);
    EXPECT_NEAR(row.component_mse[0] + row.component_mse[1], row.mse, 1e-14);
  }
  const auto csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "param,E_pred,E_0,rel_err,mse,mse_psi1,mse_psi2");
}

TEST(Report, CsvRoundTripIsBitIdentical) {
  const auto& data = single_data();
  auto net = warmed_net(data);
  const auto r = sweep_report(net, data, iota(data.size()));
  const auto back = EvalReport::parse_csv(r.to_csv());
  EXPECT_EQ(back.median_rel_err, r.median_rel_err);
  EXPECT_EQ(back.max_rel_err, r.max_rel_err);
  ASSERT_EQ(back.rows.size(), r.rows.size());
  for (size_t k = 0; k < r.rows.size(); ++k) {
    EXPECT_EQ(back.rows[k].param, r.rows[k].param);
    EXPECT_EQ(back.rows[k].e_pred, r.rows[k].e_pred);
    EXPECT_EQ(back.rows[k].rel_err, r.rows[k].rel_err);
    EXPECT_EQ(back.rows[k].mse, r.rows[k].mse);
  }
  auto resummarized = back;
  resummarized.summarize();
  EXPECT_EQ(resummarized.median_rel_err, r.median_rel_err);
  EXPECT_THROW(EvalReport::parse_csv("param,E_pred\n1,2\n"), ValidationError);
}

TEST(Probe, InRangeMatchesSweep) {
  const auto& data = single_data();
  auto net = warmed_net(data);
  const Index rec = 2;
  const std::vector<Index> one{rec};
  const auto sweep = sweep_report(net, data, one);
  const auto row = out_of_range_probe(net, problem_for_record(data, rec), "g", data.input(rec, 0),
                                      solver(static_cast<long>(data.scalar(rec, provenance::kIterations))));
  EXPECT_EQ(row.e_pred, sweep.rows[0].e_pred);
  EXPECT_NEAR(row.e_ref, sweep.rows[0].e_ref, 1e-12 * row.e_ref);
  EXPECT_NEAR(row.mse, sweep.rows[0].mse, 1e-15);
  EXPECT_TRUE(row.in_unit_range);
  EXPECT_FALSE(row.to_text().empty());
}

TEST(Bench, SolveTimeScalesWithIterations) {
  const SingleProblemD p{make_grid_1d(-12.0, 12.0, 512), Harmonic1D<double>{1}, 10.0};
  NetConfig c;
  c.n0 = 512;
  c.channels = 4;
  c.dilations = {1, 1};
  GroundStateNetD net(c);
  net.forward(Matrix<double>::Constant(2, 1, 0.5), Mode::Train);
  // Interleaved pairs, so a slow stretch on the host hits both lengths alike.
  std::vector<double> ratios;
  BenchResult one;
  for (int r = 0; r < 9; ++r) {
    one = bench_speedup(net, p, solver(1500), 10.0, 1);
    const auto two = bench_speedup(net, p, solver(3000), 10.0, 1);
    ratios.push_back(two.ite_seconds / one.ite_seconds);
  }
  std::nth_element(ratios.begin(), ratios.begin() + 4, ratios.end());
  EXPECT_GT(one.surrogate_seconds, 0.0);
  EXPECT_NEAR(ratios[4], 2.0, 0.4);
  EXPECT_EQ(one.ratio, one.ite_seconds / one.surrogate_seconds);
}
