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

#ifndef GPSTATE_DATASET_HPP
#define GPSTATE_DATASET_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "gpstate/gpe.hpp"

namespace gpstate {

enum class Spacing { UniformGrid, UniformRandom };

struct PlanSegment {
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
  Spacing spacing = Spacing::UniformGrid;
};

/// Which coefficient is swept ("g" or "omega") and how its values are drawn.
struct SamplingPlan {
  std::string parameter = "g";
  std::vector<PlanSegment> segments;
  std::uint64_t seed = 0;

  long total() const;
};

/// Values in segment order; grid segments are endpoint-inclusive linspaces.
std::vector<double> expand_plan(const SamplingPlan& plan);

/// "lo:hi:count[:grid|random]" segments joined by ';'.
SamplingPlan parse_plan(const std::string& parameter, const std::string& segments, std::uint64_t seed);
std::string format_segments(const SamplingPlan& plan);

/// 50000 gridded couplings in [0, 500].
SamplingPlan single_component_reference_plan();
/// 10000 gridded Rabi couplings in [-20, 0] plus 3000 in [-2, 0].
SamplingPlan two_component_reference_plan();

using ProblemTemplate = std::variant<SingleProblemD, TwoComponentProblemD>;

inline bool is_two_component(const ProblemTemplate& p) {
  return std::holds_alternative<TwoComponentProblemD>(p);
}

inline const GridPtr<double>& problem_grid(const ProblemTemplate& p) {
  return std::visit([](const auto& q) -> const GridPtr<double>& { return q.grid; }, p);
}

/// Copy of `base` with the swept coefficient set to `value`.
ProblemTemplate with_parameter(const ProblemTemplate& base, const std::string& parameter, double value);

namespace provenance {
inline constexpr const char* kEnergy = "energy";
inline constexpr const char* kEnergyFunctional = "energy_functional";
inline constexpr const char* kPeakDensity = "peak_density";
inline constexpr const char* kIterations = "iterations";
inline constexpr const char* kTimeStep = "dt";
}  // namespace provenance

struct DatasetHeader {
  int dims = 1;
  AxisSpec<double> x{-12.0, 12.0, 512};
  AxisSpec<double> y{0.0, 1.0, 1};
  int components = 1;
  // The first `input_count` scalars are network inputs; the rest are provenance.
  int input_count = 1;
  std::vector<std::string> scalar_names;
  std::string potential;

  Index grid_size() const { return x.points * y.points; }
  GridPtr<double> grid() const;
  bool same_layout(const DatasetHeader& o) const;
};

/// One solved ground state. `targets` is (grid points, components), x fastest.
struct SampleRecord {
  std::vector<double> scalars;
  Eigen::ArrayXXd targets;
};

struct Dataset {
  DatasetHeader header;
  std::vector<SampleRecord> records;

  Index size() const { return static_cast<Index>(records.size()); }
  Index scalar_index(const std::string& name) const;
  double scalar(Index record, const std::string& name) const;
  double input(Index record, Index k = 0) const { return records[record].scalars[k]; }
  const std::string& parameter_name() const { return header.scalar_names.front(); }
};

/// Header for datasets generated from `problem` sweeping `parameter`.
DatasetHeader make_header(const ProblemTemplate& problem, const std::string& parameter);

/// Builds a record from a solved state: max-normalized amplitude targets plus provenance.
/// Stored energies are those of the stored amplitude, so a record is self-consistent even
/// where the solved field carries sub-1e-6 negative ringing that the amplitude folds away.
SampleRecord make_record(double parameter, const SingleProblemD& problem, const GroundState<double>& state,
                         const EvolutionConfigD& config);
SampleRecord make_record(double parameter, const TwoComponentProblemD& problem,
                         const TwoComponentGroundState<double>& state, const EvolutionConfigD& config);

/// Raised when a solve fails during batch generation.
class GenerationError : public NumericalError {
 public:
  GenerationError(const std::string& what, Index failed, std::vector<Index> completed)
      : NumericalError(what), failed_(failed), completed_(std::move(completed)) {}
  Index failed_index() const { return failed_; }
  const std::vector<Index>& completed() const { return completed_; }
  /// Plain-text manifest: status line per record index.
  std::string manifest(Index total) const;

 private:
  Index failed_;
  std::vector<Index> completed_;
};

using ProgressFn = std::function<void(Index done, Index total)>;

/// One solve per plan value, run on `workers` threads; records land in plan order.
Dataset generate_dataset(const SamplingPlan& plan, const ProblemTemplate& problem,
                         const EvolutionConfigD& config, int workers, const ProgressFn& progress = {});

struct Split {
  std::vector<Index> train;
  std::vector<Index> validation;
};

/// Seeded random partition; validation size is round(fraction * count), kept in [1, count - 1].
Split split_train_val(Index count, double val_fraction, std::uint64_t seed);

/// GPDS binary format, little-endian throughout.
std::string serialize_dataset(const Dataset& dataset);
Dataset deserialize_dataset(const std::string& bytes);
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Checks target ranges, normalization and layout; throws ValidationError on the first violation.
void validate_dataset(const Dataset& dataset);

/// One row per record: scalars then flattened targets, 17 significant digits.
std::string dataset_to_csv(const Dataset& dataset);

/// Problem for record `i` rebuilt from the header and stored coefficients.
ProblemTemplate problem_for_record(const Dataset& dataset, Index i);

}  // namespace gpstate

#endif  // GPSTATE_DATASET_HPP
