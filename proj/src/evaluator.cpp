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

#include "gpstate/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "gpstate/trainer.hpp"

namespace gpstate {

namespace {

void check_amplitude(const Eigen::ArrayXXd& a, const GridPtr<double>& grid) {
  if (a.rows() != grid->nx() || a.cols() != grid->ny())
    throw ValidationError("postprocess_prediction: array shape does not match grid");
  if (!a.allFinite()) throw NumericalError("postprocess_prediction: non-finite prediction");
  if (a.minCoeff() < 0.0) throw ValidationError("postprocess_prediction: negative amplitude");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double quotient_energy(const ProblemTemplate& problem, const std::vector<Eigen::ArrayXXd>& arrays) {
  const auto& grid = problem_grid(problem);
  if (const auto* s = std::get_if<SingleProblemD>(&problem))
    return energy_single(postprocess_prediction(arrays.at(0), grid), *s);
  return energy_two(postprocess_prediction(arrays.at(0), arrays.at(1), grid), std::get<TwoComponentProblemD>(problem));
}

// Fresh solve: max-normalized amplitudes per component and their quotient energy (as stored in datasets).
std::pair<double, std::vector<Eigen::ArrayXXd>> solve_reference(const ProblemTemplate& problem,
                                                                const EvolutionConfigD& config) {
  if (const auto* s = std::get_if<SingleProblemD>(&problem)) {
    const auto gs = solve_ground_single(*s, config);
    std::vector<Eigen::ArrayXXd> arrays{max_normalize(gs.field)};
    return {quotient_energy(problem, arrays), std::move(arrays)};
  }
  const auto gs = solve_ground_two(std::get<TwoComponentProblemD>(problem), config);
  auto [a, b] = max_normalize(gs.field);
  std::vector<Eigen::ArrayXXd> arrays{std::move(a), std::move(b)};
  return {quotient_energy(problem, arrays), std::move(arrays)};
}

}  // namespace

FieldD postprocess_prediction(const Eigen::ArrayXXd& amplitude, const GridPtr<double>& grid) {
  check_amplitude(amplitude, grid);
  return normalize_l2(FieldD::from_real(grid, amplitude));
}

TwoComponentFieldD postprocess_prediction(const Eigen::ArrayXXd& first, const Eigen::ArrayXXd& second,
                                          const GridPtr<double>& grid) {
  check_amplitude(first, grid);
  check_amplitude(second, grid);
  return normalize_l2(TwoComponentFieldD(grid, first.cast<std::complex<double>>(), second.cast<std::complex<double>>()));
}

double relative_energy_error(const FieldD& pred, const SingleProblemD& problem, double reference) {
  if (reference == 0.0) throw ValidationError("relative_energy_error: zero reference energy");
  return std::abs(energy_single(pred, problem) - reference) / std::abs(reference);
}

double relative_energy_error(const TwoComponentFieldD& pred, const TwoComponentProblemD& problem, double reference) {
  if (reference == 0.0) throw ValidationError("relative_energy_error: zero reference energy");
  return std::abs(energy_two(pred, problem) - reference) / std::abs(reference);
}

void EvalReport::summarize() {
  std::vector<double> errs;
  errs.reserve(rows.size());
  for (const auto& r : rows) errs.push_back(r.rel_err);
  median_rel_err = median(errs);
  max_rel_err = errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "param,E_pred,E_0,rel_err,mse";
  if (components == 2) os << ",mse_psi1,mse_psi2";
  os << '\n';
  for (const auto& r : rows) {
    os << r.param << ',' << r.e_pred << ',' << r.e_ref << ',' << r.rel_err << ',' << r.mse;
    for (double m : r.component_mse) os << ',' << m;
    os << '\n';
  }
  os << "# median_rel_err=" << median_rel_err << ",max_rel_err=" << max_rel_err << '\n';
  return os.str();
}

EvalReport EvalReport::parse_csv(const std::string& text) {
  EvalReport rep;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("param,E_pred,E_0,rel_err,mse", 0) != 0)
    throw ValidationError("eval report: missing header");
  rep.components = line.find("mse_psi2") != std::string::npos ? 2 : 1;
  bool footer = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto a = line.find("median_rel_err=");
      const auto b = line.find(",max_rel_err=");
      if (a == std::string::npos || b == std::string::npos) throw ValidationError("eval report: bad footer");
      rep.median_rel_err = std::stod(line.substr(a + 15, b - a - 15));
      rep.max_rel_err = std::stod(line.substr(b + 13));
      footer = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    const size_t want = rep.components == 2 ? 7 : 5;
    if (v.size() != want) throw ValidationError("eval report: wrong column count");
    EvalRow r{v[0], v[1], v[2], v[3], v[4], {}};
    if (rep.components == 2) r.component_mse = {v[5], v[6]};
    rep.rows.push_back(r);
  }
  if (!footer) throw ValidationError("eval report: missing summary footer");
  return rep;
}

std::vector<Eigen::ArrayXXd> predict_arrays(GroundStateNetD& model, const Matrix<double>& inputs, Index sample,
                                            Index nx, Index ny) {
  const auto out = model.predict(inputs.middleRows(sample, 1));
  std::vector<Eigen::ArrayXXd> arrays;
  for (Index c = 0; c < out.channels; ++c)
    arrays.push_back(Eigen::Map<const Eigen::ArrayXXd>(out.values.col(c).data(), nx, ny));
  return arrays;
}

EvalReport sweep_report(GroundStateNetD& model, const Dataset& data, std::span<const Index> indices,
                        const SweepOptions& options) {
  check_compatible(model, data);
  const auto& h = data.header;
  const Index nx = h.x.points;
  const Index ny = h.dims == 2 ? h.y.points : 1;
  const double dv = h.grid()->cell_volume();
  const auto& param = data.parameter_name();

  EvalReport rep;
  rep.components = h.components;
  constexpr size_t kChunk = 256;
  for (size_t start = 0; start < indices.size(); start += kChunk) {
    const auto part = indices.subspan(start, std::min(kChunk, indices.size() - start));
    const auto pred = model.predict(batch_inputs(data, part));
    for (size_t b = 0; b < part.size(); ++b) {
      const Index idx = part[b];
      const auto& rec = data.records[static_cast<size_t>(idx)];
      ProblemTemplate problem = options.problem
                                    ? with_parameter(*options.problem, param, data.input(idx))
                                    : problem_for_record(data, idx);
      std::vector<Eigen::ArrayXXd> arrays;
      EvalRow row;
      row.param = data.input(idx);
      for (Index c = 0; c < h.components; ++c) {
        const auto col = pred.values.col(static_cast<Index>(b) * h.components + c);
        arrays.push_back(Eigen::Map<const Eigen::ArrayXXd>(col.data(), nx, ny));
        const double m = (col.array() - rec.targets.col(c)).square().sum() * dv;
        row.mse += m;
        if (h.components == 2) row.component_mse.push_back(m);
      }
      row.e_pred = quotient_energy(problem, arrays);
      if (options.recompute) {
        EvolutionConfigD cfg;
        cfg.dtau = data.scalar(idx, provenance::kTimeStep);
        cfg.iterations = static_cast<long>(data.scalar(idx, provenance::kIterations));
        row.e_ref = solve_reference(problem, cfg).first;
      } else {
        row.e_ref = data.scalar(idx, provenance::kEnergy);
      }
      if (row.e_ref == 0.0) throw ValidationError("sweep_report: zero reference energy");
      row.rel_err = std::abs(row.e_pred - row.e_ref) / std::abs(row.e_ref);
      rep.rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rep.rows.begin(), rep.rows.end(),
                   [](const EvalRow& a, const EvalRow& b) { return a.param < b.param; });
  rep.summarize();
  return rep;
}

std::string BenchResult::to_text() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "method      median_seconds  runs\n";
  os << "surrogate   " << std::setw(14) << surrogate_seconds << "  " << runs << '\n';
  os << "ite         " << std::setw(14) << ite_seconds << "  " << runs << '\n';
  os << "ratio       " << std::setw(14) << ratio << '\n';
  return os.str();
}

BenchResult bench_speedup(GroundStateNetD& model, const ProblemTemplate& problem, const EvolutionConfigD& config,
                          double coefficient, int runs) {
  if (runs < 1) throw ValidationError("bench: runs must be positive");
  Matrix<double> input = Matrix<double>::Constant(1, model.config().in_features, coefficient);
  model.predict(input);  // warm-up, discarded
  std::vector<double> nn, ite;
  for (int r = 0; r < runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = model.predict(input);
    nn.push_back(seconds_since(t0));
    if (!out.values.allFinite()) throw NumericalError("bench: non-finite prediction");
  }
  for (int r = 0; r < runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    if (const auto* s = std::get_if<SingleProblemD>(&problem))
      solve_ground_single(*s, config);
    else
      solve_ground_two(std::get<TwoComponentProblemD>(problem), config);
    ite.push_back(seconds_since(t0));
  }
  BenchResult b;
  b.runs = runs;
  b.surrogate_seconds = median(nn);
  b.ite_seconds = median(ite);
  b.ratio = b.ite_seconds / b.surrogate_seconds;
  return b;
}

std::string ProbeRow::to_text() const {
  std::ostringstream os;
  os << std::setprecision(10) << "coefficient=" << coefficient << " in_unit_range=" << in_unit_range
     << " predicted_norm=" << predicted_norm << " E_pred=" << e_pred << " E_0=" << e_ref << " rel_err=" << rel_err
     << " mse=" << mse << " valid=" << (physically_valid ? "yes" : "no");
  return os.str();
}

ProbeRow out_of_range_probe(GroundStateNetD& model, const ProblemTemplate& problem, const std::string& parameter,
                            double coefficient, const EvolutionConfigD& config) {
  const auto concrete = with_parameter(problem, parameter, coefficient);
  const auto& grid = problem_grid(concrete);
  Matrix<double> input = Matrix<double>::Constant(1, model.config().in_features, coefficient);
  const auto arrays = predict_arrays(model, input, 0, grid->nx(), grid->ny());
  const auto [e_ref, target] = solve_reference(concrete, config);

  ProbeRow row;
  row.coefficient = coefficient;
  row.in_unit_range = true;
  double sq = 0.0;
  for (size_t c = 0; c < arrays.size(); ++c) {
    row.in_unit_range = row.in_unit_range && arrays[c].minCoeff() >= 0.0 && arrays[c].maxCoeff() <= 1.0;
    sq += arrays[c].square().sum();
    row.mse += (arrays[c] - target.at(c)).square().sum() * grid->cell_volume();
  }
  row.predicted_norm = std::sqrt(sq * grid->cell_volume());
  row.e_pred = quotient_energy(concrete, arrays);
  row.e_ref = e_ref;
  row.rel_err = std::abs(row.e_pred - e_ref) / std::abs(e_ref);
  // Report-only heuristic: energy within 5% and profile close to the solved one.
  row.physically_valid = row.in_unit_range && row.rel_err < 5e-2 && row.mse < 1e-2;
  return row;
}

}  // namespace gpstate
