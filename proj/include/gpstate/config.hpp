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

#ifndef GPSTATE_CONFIG_HPP
#define GPSTATE_CONFIG_HPP

#include <map>
#include <string>

#include "gpstate/dataset.hpp"
#include "gpstate/model.hpp"
#include "gpstate/trainer.hpp"

namespace gpstate {

/// Flat key=value configuration covering every pipeline stage. Keys are
/// dotted ("solver.dt", "net.channels"); unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;

  /// key=value lines, '#' starts a comment.
  void merge_text(const std::string& text, const std::string& source = "config");
  void merge_file(const std::string& path);

  int dims() const;
  bool two_component() const;
  int workers() const;  // GPSTATE_WORKERS overrides run.workers

  GridPtr<double> grid() const;
  ProblemTemplate problem() const;
  EvolutionConfigD solver() const;
  SamplingPlan plan() const;
  NetConfig net() const;
  TrainConfig train() const;
  double val_fraction() const;
  std::uint64_t split_seed() const;

  /// All keys with "auto" values resolved, sorted.
  std::string resolved_text() const;

 private:
  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::string resolved(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

}  // namespace gpstate

#endif  // GPSTATE_CONFIG_HPP
