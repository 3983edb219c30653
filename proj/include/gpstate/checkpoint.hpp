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

#ifndef GPSTATE_CHECKPOINT_HPP
#define GPSTATE_CHECKPOINT_HPP

#include <string>

#include "gpstate/grid.hpp"
#include "gpstate/model.hpp"

namespace gpstate {

/// Context stored alongside the weights so a checkpoint can be used on its own.
struct ModelMeta {
  std::string parameter = "g";
  int dims = 1;
  AxisSpec<double> x{-12.0, 12.0, 128};
  AxisSpec<double> y{0.0, 1.0, 1};
  std::string potential;
};

struct Checkpoint {
  GroundStateNetD model;
  ModelMeta meta;
};

/// GPNN format: magic, version, NetConfig manifest, metadata, layer manifest,
/// named little-endian f64 parameter blocks (including batchnorm running
/// statistics), trailing crc32 over everything before it.
std::string serialize_checkpoint(const GroundStateNetD& model, const ModelMeta& meta);
Checkpoint deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const GroundStateNetD& model, const ModelMeta& meta, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Overwrites the parameters and running statistics of `model` from a
/// serialized checkpoint with an identical architecture.
void restore_parameters(GroundStateNetD& model, const std::string& bytes);

}  // namespace gpstate

#endif  // GPSTATE_CHECKPOINT_HPP
