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

#ifndef GPSTATE_TRAINER_HPP
#define GPSTATE_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gpstate/checkpoint.hpp"
#include "gpstate/dataset.hpp"
#include "gpstate/model.hpp"
#include "gpstate/optim.hpp"

namespace gpstate {

struct EpochRecord {
  long epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainConfig {
  AdamConfig adam;
  long batch_size = 64;
  long epochs = 10;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // Empty: keep the best parameters in memory only.
  std::string checkpoint_dir;
  // Multiply the learning rate by lr_decay_factor every lr_decay_every epochs (0 = off).
  long lr_decay_every = 0;
  double lr_decay_factor = 0.5;
  std::function<void(const EpochRecord&)> on_epoch;

  void validate() const;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  long best_epoch = -1;
  double best_val_loss = 0.0;

  /// epoch,train_loss,val_loss[,seconds]
  std::string to_csv(bool with_timing = true) const;
};

struct TrainResult {
  TrainReport report;
  std::string best_checkpoint;  // path, empty without a checkpoint directory
};

/// Architecture defaults adapted to a dataset: grid shape, channel counts and
/// input normalization mapping the observed coefficient range onto [-1, 1].
NetConfig fit_net_config(const Dataset& data, NetConfig base, bool normalize_inputs = true);
ModelMeta model_meta(const Dataset& data);
void check_compatible(const GroundStateNetD& model, const Dataset& data);

Matrix<double> batch_inputs(const Dataset& data, std::span<const Index> indices);
Tensor<double> batch_targets(const Dataset& data, std::span<const Index> indices);

/// Mean integral-MSE over `indices`, eval mode.
double evaluate_loss(GroundStateNetD& model, const Dataset& data, std::span<const Index> indices);

/// Mini-batch Adam training; the model ends holding the minimum-validation-loss parameters.
TrainResult train(GroundStateNetD& model, const Dataset& data, const Split& split, const TrainConfig& config);

}  // namespace gpstate

#endif  // GPSTATE_TRAINER_HPP
