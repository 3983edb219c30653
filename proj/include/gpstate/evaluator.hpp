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

#ifndef GPSTATE_EVALUATOR_HPP
#define GPSTATE_EVALUATOR_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpstate/dataset.hpp"
#include "gpstate/model.hpp"

namespace gpstate {

/// Interprets a [0, 1] amplitude array as a real non-negative field and normalizes it.
FieldD postprocess_prediction(const Eigen::ArrayXXd& amplitude, const GridPtr<double>& grid);
/// Two components, normalized jointly.
TwoComponentFieldD postprocess_prediction(const Eigen::ArrayXXd& first, const Eigen::ArrayXXd& second,
                                          const GridPtr<double>& grid);

/// |E(pred) - E0| / |E0| using the quotient energy of the matching problem.
double relative_energy_error(const FieldD& pred, const SingleProblemD& problem, double reference);
double relative_energy_error(const TwoComponentFieldD& pred, const TwoComponentProblemD& problem, double reference);

struct EvalRow {
  double param = 0.0;
  double e_pred = 0.0;
  double e_ref = 0.0;
  double rel_err = 0.0;
  double mse = 0.0;
  std::vector<double> component_mse;  // filled for two-component data
};

struct EvalReport {
  int components = 1;
  std::vector<EvalRow> rows;
  double median_rel_err = 0.0;
  double max_rel_err = 0.0;

  void summarize();
  /// param,E_pred,E_0,rel_err,mse[,mse_psi1,mse_psi2] rows and a '#' summary footer.
  std::string to_csv() const;
  static EvalReport parse_csv(const std::string& text);
};

/// Predicted amplitudes for record inputs, reshaped per component to (nx, ny).
std::vector<Eigen::ArrayXXd> predict_arrays(GroundStateNetD& model, const Matrix<double>& inputs, Index sample,
                                            Index nx, Index ny);

struct SweepOptions {
  // Re-solve each record with its stored time step and iteration count instead of reading E0.
  bool recompute = false;
  std::optional<ProblemTemplate> problem;  // overrides the problem rebuilt from the dataset
};

/// Evaluates the records in `indices`; rows come back sorted by parameter.
EvalReport sweep_report(GroundStateNetD& model, const Dataset& data, std::span<const Index> indices,
                        const SweepOptions& options = {});

struct BenchResult {
  double surrogate_seconds = 0.0;  // median single forward
  double ite_seconds = 0.0;        // median full solve
  double ratio = 0.0;
  int runs = 0;
  std::string to_text() const;
};

/// Median-of-`runs` wall time of one eval-mode forward versus one full ITE solve.
BenchResult bench_speedup(GroundStateNetD& model, const ProblemTemplate& problem, const EvolutionConfigD& config,
                          double coefficient, int runs = 11);

struct ProbeRow {
  double coefficient = 0.0;
  bool in_unit_range = false;
  double predicted_norm = 0.0;  // L2 norm of the raw prediction
  double e_pred = 0.0;
  double e_ref = 0.0;
  double rel_err = 0.0;
  double mse = 0.0;
  bool physically_valid = false;
  std::string to_text() const;
};

/// Compares a prediction with a fresh ITE solve; report-only.
ProbeRow out_of_range_probe(GroundStateNetD& model, const ProblemTemplate& problem, const std::string& parameter,
                            double coefficient, const EvolutionConfigD& config);

}  // namespace gpstate

#endif  // GPSTATE_EVALUATOR_HPP
