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

#ifndef GPSTATE_GRADCHECK_HPP
#define GPSTATE_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gpstate {

struct GradCheckResult {
  std::string name;
  double rel_error = 0.0;  // max |analytic - numeric| / max(max |numeric|, 1e-3)
  bool pass = false;
};

/// Central finite differences against backward() for every layer type and
/// for small composed networks in 1D and 2D.
std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed = 0, double tolerance = 1e-4);

}  // namespace gpstate

#endif  // GPSTATE_GRADCHECK_HPP
