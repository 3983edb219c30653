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

#include "gpstate/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <random>
#include <sstream>

#include "binary_io.hpp"

namespace gpstate {

void TrainConfig::validate() const {
  adam.validate();
  if (batch_size < 1) throw ValidationError("train: batch size must be at least 1");
  if (epochs < 1) throw ValidationError("train: epochs must be at least 1");
  if (lr_decay_every < 0 || !(lr_decay_factor > 0.0))
    throw ValidationError("train: invalid learning-rate decay");
}

std::string TrainReport::to_csv(bool with_timing) const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "epoch,train_loss,val_loss" << (with_timing ? ",seconds" : "") << '\n';
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.train_loss << ',' << e.val_loss;
    if (with_timing) os << ',' << e.seconds;
    os << '\n';
  }
  return os.str();
}

NetConfig fit_net_config(const Dataset& data, NetConfig base, bool normalize_inputs) {
  const auto& h = data.header;
  base.spatial_dims = h.dims;
  base.n0 = h.x.points;
  base.n1 = h.dims == 2 ? h.y.points : 1;
  base.out_channels = h.components;
  base.in_features = h.input_count;
  if (normalize_inputs && data.size() > 0) {
    double lo = data.input(0), hi = data.input(0);
    for (Index i = 1; i < data.size(); ++i) {
      lo = std::min(lo, data.input(i));
      hi = std::max(hi, data.input(i));
    }
    base.input_offset = 0.5 * (lo + hi);
    base.input_scale = hi > lo ? 0.5 * (hi - lo) : 1.0;
  }
  base.validate();
  return base;
}

ModelMeta model_meta(const Dataset& data) {
  ModelMeta m;
  m.parameter = data.parameter_name();
  m.dims = data.header.dims;
  m.x = data.header.x;
  m.y = data.header.y;
  m.potential = data.header.potential;
  return m;
}

void check_compatible(const GroundStateNetD& model, const Dataset& data) {
  const auto& c = model.config();
  const auto& h = data.header;
  if (c.spatial_dims != h.dims || c.n0 != h.x.points || c.n1 != (h.dims == 2 ? h.y.points : 1))
    throw ValidationError("model grid does not match dataset grid");
  if (c.out_channels != h.components) throw ValidationError("model output channels do not match dataset components");
  if (c.in_features != h.input_count) throw ValidationError("model inputs do not match dataset inputs");
}

Matrix<double> batch_inputs(const Dataset& data, std::span<const Index> indices) {
  const Index k = data.header.input_count;
  Matrix<double> x(static_cast<Index>(indices.size()), k);
  for (size_t b = 0; b < indices.size(); ++b)
    for (Index j = 0; j < k; ++j) x(static_cast<Index>(b), j) = data.input(indices[b], j);
  return x;
}

Tensor<double> batch_targets(const Dataset& data, std::span<const Index> indices) {
  const auto& h = data.header;
  Tensor<double> t(static_cast<Index>(indices.size()), h.components, h.x.points, h.dims == 2 ? h.y.points : 1);
  for (size_t b = 0; b < indices.size(); ++b)
    t.sample(static_cast<Index>(b)) = data.records[static_cast<size_t>(indices[b])].targets.matrix();
  return t;
}

double evaluate_loss(GroundStateNetD& model, const Dataset& data, std::span<const Index> indices) {
  if (indices.empty()) throw ValidationError("evaluate_loss: empty index set");
  check_compatible(model, data);
  const double dv = data.header.grid()->cell_volume();
  constexpr size_t kChunk = 256;
  double total = 0.0;
  for (size_t start = 0; start < indices.size(); start += kChunk) {
    const auto part = indices.subspan(start, std::min(kChunk, indices.size() - start));
    const auto pred = model.predict(batch_inputs(data, part));
    const auto loss = integral_mse_loss(pred, batch_targets(data, part), dv);
    total += loss.value * static_cast<double>(part.size());
  }
  return total / static_cast<double>(indices.size());
}

namespace {

void shuffle_indices(std::vector<Index>& v, std::uint64_t seed, long epoch) {
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(epoch + 1)));
  for (size_t i = v.size(); i > 1; --i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const size_t j = std::min(i - 1, static_cast<size_t>(u * static_cast<double>(i)));
    std::swap(v[i - 1], v[j]);
  }
}

std::string best_name(long epoch, double loss) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "best_epoch%04ld_val%.6e.gpnn", epoch, loss);
  return buf;
}

}  // namespace

TrainResult train(GroundStateNetD& model, const Dataset& data, const Split& split, const TrainConfig& config) {
  config.validate();
  check_compatible(model, data);
  if (split.train.empty() || split.validation.empty()) throw ValidationError("train: empty split");
  for (Index i : split.train)
    if (i < 0 || i >= data.size()) throw ValidationError("train: split index out of range");
  for (Index i : split.validation)
    if (i < 0 || i >= data.size()) throw ValidationError("train: split index out of range");

  namespace fs = std::filesystem;
  if (!config.checkpoint_dir.empty()) fs::create_directories(config.checkpoint_dir);
  const ModelMeta meta = model_meta(data);
  const double dv = data.header.grid()->cell_volume();

  AdamState<double> adam;
  AdamConfig adam_cfg = config.adam;
  auto params = model.parameters();
  std::vector<Index> order = split.train;
  TrainResult result;
  std::string best_bytes;
  std::string best_file;

  for (long epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.lr_decay_every > 0 && epoch > 1 && (epoch - 1) % config.lr_decay_every == 0)
      adam_cfg.lr *= config.lr_decay_factor;
    if (config.shuffle) shuffle_indices(order, config.seed, epoch);

    double sum = 0.0;
    long batch_no = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size), ++batch_no) {
      const std::span<const Index> part(order.data() + start,
                                        std::min(order.size() - start, static_cast<size_t>(config.batch_size)));
      model.zero_grad();
      Tensor<double> pred;
      LossResult<double> loss{0.0, {}};
      try {
        pred = model.forward(batch_inputs(data, part), Mode::Train);
        loss = integral_mse_loss(pred, batch_targets(data, part), dv);
        if (!std::isfinite(loss.value)) throw NumericalError("non-finite loss");
        model.backward(loss.grad);
      } catch (const NumericalError& e) {
        throw NumericalError("train: " + std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_no));
      }
      adam_step(params, adam, adam_cfg);
      sum += loss.value * static_cast<double>(part.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = sum / static_cast<double>(order.size());
    rec.val_loss = evaluate_loss(model, data, split.validation);
    if (!std::isfinite(rec.val_loss))
      throw NumericalError("train: non-finite validation loss at epoch " + std::to_string(epoch));
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.report.epochs.push_back(rec);

    if (result.report.best_epoch < 0 || rec.val_loss < result.report.best_val_loss) {
      result.report.best_epoch = epoch;
      result.report.best_val_loss = rec.val_loss;
      best_bytes = serialize_checkpoint(model, meta);
      if (!config.checkpoint_dir.empty()) {
        if (!best_file.empty()) fs::remove(best_file);
        best_file = (fs::path(config.checkpoint_dir) / best_name(epoch, rec.val_loss)).string();
        io::write_file(best_file, best_bytes);
        io::write_file((fs::path(config.checkpoint_dir) / "best.gpnn").string(), best_bytes);
      }
    }
    if (config.on_epoch) config.on_epoch(rec);
  }

  restore_parameters(model, best_bytes);
  if (!config.checkpoint_dir.empty()) {
    // Timing lives in its own file so the report stays reproducible byte for byte.
    io::write_file((fs::path(config.checkpoint_dir) / "train_report.csv").string(), result.report.to_csv(false));
    io::write_file((fs::path(config.checkpoint_dir) / "train_timing.csv").string(), result.report.to_csv(true));
    result.best_checkpoint = (fs::path(config.checkpoint_dir) / "best.gpnn").string();
  }
  return result;
}

}  // namespace gpstate
