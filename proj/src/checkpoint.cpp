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

#include "gpstate/checkpoint.hpp"

#include "binary_io.hpp"

namespace gpstate {

namespace {

constexpr char kMagic[4] = {'G', 'P', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

void write_matrix(io::ByteWriter& w, const std::string& name, const Matrix<double>& m) {
  w.str(name);
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  for (Index k = 0; k < m.size(); ++k) w.f64(m.data()[k]);
}

void write_config(io::ByteWriter& w, const NetConfig& c) {
  w.u16(static_cast<std::uint16_t>(c.spatial_dims));
  w.u64(static_cast<std::uint64_t>(c.n0));
  w.u64(static_cast<std::uint64_t>(c.n1));
  w.u64(static_cast<std::uint64_t>(c.channels));
  w.u64(static_cast<std::uint64_t>(c.kernel));
  w.u64(static_cast<std::uint64_t>(c.out_channels));
  w.u64(static_cast<std::uint64_t>(c.in_features));
  w.u16(static_cast<std::uint16_t>(c.dilations.size()));
  for (Index d : c.dilations) w.u64(static_cast<std::uint64_t>(d));
  w.f64(c.leaky_slope);
  w.f64(c.input_offset);
  w.f64(c.input_scale);
  w.f64(c.bn_eps);
  w.f64(c.bn_momentum);
  w.u64(c.seed);
}

NetConfig read_config(io::ByteReader& r) {
  NetConfig c;
  c.spatial_dims = r.u16();
  c.n0 = static_cast<Index>(r.u64());
  c.n1 = static_cast<Index>(r.u64());
  c.channels = static_cast<Index>(r.u64());
  c.kernel = static_cast<Index>(r.u64());
  c.out_channels = static_cast<Index>(r.u64());
  c.in_features = static_cast<Index>(r.u64());
  c.dilations.resize(r.u16());
  for (auto& d : c.dilations) d = static_cast<Index>(r.u64());
  c.leaky_slope = r.f64();
  c.input_offset = r.f64();
  c.input_scale = r.f64();
  c.bn_eps = r.f64();
  c.bn_momentum = r.f64();
  c.seed = r.u64();
  return c;
}

void write_parameters(io::ByteWriter& w, const GroundStateNetD& model) {
  const auto params = model.parameters();
  const auto& blocks = model.blocks();
  w.u32(static_cast<std::uint32_t>(params.size() + 3 * blocks.size()));
  for (const auto* p : params) write_matrix(w, p->name, p->value);
  for (size_t i = 0; i < blocks.size(); ++i) {
    const auto& bn = blocks[i].norm;
    const std::string base = "block" + std::to_string(i) + ".bn";
    write_matrix(w, base + ".running_mean", bn.running_mean);
    write_matrix(w, base + ".running_var", bn.running_var);
    write_matrix(w, base + ".stats_initialized",
                 Matrix<double>::Constant(1, 1, bn.stats_initialized ? 1.0 : 0.0));
  }
}

void read_parameters(io::ByteReader& r, GroundStateNetD& model) {
  auto params = model.parameters();
  auto& blocks = model.blocks();
  const auto count = r.u32();
  if (count != params.size() + 3 * blocks.size())
    throw IoError("checkpoint: parameter block count does not match architecture");
  auto read_into = [&](const std::string& want, auto& dst) {
    const auto name = r.str();
    if (name != want) throw IoError("checkpoint: expected block '" + want + "', found '" + name + "'");
    const auto rows = static_cast<Index>(r.u64());
    const auto cols = static_cast<Index>(r.u64());
    if (rows != dst.rows() || cols != dst.cols())
      throw IoError("checkpoint: block '" + name + "' has the wrong shape");
    for (Index k = 0; k < dst.size(); ++k) dst.data()[k] = r.f64();
  };
  for (auto* p : params) read_into(p->name, p->value);
  for (size_t i = 0; i < blocks.size(); ++i) {
    auto& bn = blocks[i].norm;
    const std::string base = "block" + std::to_string(i) + ".bn";
    read_into(base + ".running_mean", bn.running_mean);
    read_into(base + ".running_var", bn.running_var);
    Matrix<double> flag(1, 1);
    read_into(base + ".stats_initialized", flag);
    bn.stats_initialized = flag(0, 0) != 0.0;
  }
}

void write_manifest(io::ByteWriter& w, const GroundStateNetD& model) {
  const auto m = model.manifest();
  w.u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& l : m) {
    w.str(l.type);
    w.u16(static_cast<std::uint16_t>(l.shape.size()));
    for (Index s : l.shape) w.u64(static_cast<std::uint64_t>(s));
    w.u64(static_cast<std::uint64_t>(l.dilation));
    w.u64(static_cast<std::uint64_t>(l.spatial));
  }
}

void check_manifest(io::ByteReader& r, const GroundStateNetD& model) {
  const auto m = model.manifest();
  if (r.u32() != m.size()) throw IoError("checkpoint: layer manifest length mismatch");
  for (const auto& l : m) {
    const auto type = r.str();
    std::vector<Index> shape(r.u16());
    for (auto& s : shape) s = static_cast<Index>(r.u64());
    const auto dilation = static_cast<Index>(r.u64());
    const auto spatial = static_cast<Index>(r.u64());
    if (type != l.type || shape != l.shape || dilation != l.dilation || spatial != l.spatial)
      throw IoError("checkpoint: layer manifest does not match the stored configuration");
  }
}

std::string check_and_strip(const std::string& bytes) {
  if (bytes.size() < 10 || bytes.compare(0, 4, std::string(kMagic, 4)) != 0)
    throw IoError("checkpoint: bad magic (expected GPNN)");
  io::ByteReader tail(bytes, "checkpoint");
  tail.seek(bytes.size() - 4);
  if (io::crc32_of(bytes.data(), bytes.size() - 4) != tail.u32())
    throw ChecksumError("checkpoint: checksum mismatch", -1);
  return bytes.substr(0, bytes.size() - 4);
}

}  // namespace

std::string serialize_checkpoint(const GroundStateNetD& model, const ModelMeta& meta) {
  io::ByteWriter w;
  w.bytes(std::string(kMagic, 4));
  w.u16(kVersion);
  write_config(w, model.config());
  w.str(meta.parameter);
  w.u16(static_cast<std::uint16_t>(meta.dims));
  w.f64(meta.x.min);
  w.f64(meta.x.max);
  w.u64(static_cast<std::uint64_t>(meta.x.points));
  w.f64(meta.y.min);
  w.f64(meta.y.max);
  w.u64(static_cast<std::uint64_t>(meta.y.points));
  w.str(meta.potential);
  write_manifest(w, model);
  write_parameters(w, model);
  w.u32(io::crc32_of(w.data().data(), w.size()));
  return w.data();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  const std::string body = check_and_strip(bytes);
  io::ByteReader r(body, "checkpoint");
  r.bytes(4);
  const auto version = r.u16();
  if (version != kVersion) throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  NetConfig config = read_config(r);
  ModelMeta meta;
  meta.parameter = r.str();
  meta.dims = r.u16();
  meta.x.min = r.f64();
  meta.x.max = r.f64();
  meta.x.points = static_cast<Index>(r.u64());
  meta.y.min = r.f64();
  meta.y.max = r.f64();
  meta.y.points = static_cast<Index>(r.u64());
  meta.potential = r.str();
  Checkpoint ck{GroundStateNetD(config), meta};
  check_manifest(r, ck.model);
  read_parameters(r, ck.model);
  if (r.remaining() != 0) throw IoError("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const GroundStateNetD& model, const ModelMeta& meta, const std::string& path) {
  io::write_file(path, serialize_checkpoint(model, meta));
}

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return deserialize_checkpoint(io::read_file(path));
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + " ('" + path + "')");
  }
}

void restore_parameters(GroundStateNetD& model, const std::string& bytes) {
  Checkpoint ck = deserialize_checkpoint(bytes);
  const auto& a = ck.model.config();
  const auto& b = model.config();
  if (a.n0 != b.n0 || a.n1 != b.n1 || a.channels != b.channels || a.kernel != b.kernel ||
      a.dilations != b.dilations || a.out_channels != b.out_channels || a.in_features != b.in_features)
    throw ValidationError("restore_parameters: architecture mismatch");
  auto src = ck.model.parameters();
  auto dst = model.parameters();
  for (size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
  for (size_t i = 0; i < model.blocks().size(); ++i) {
    auto& to = model.blocks()[i].norm;
    const auto& from = ck.model.blocks()[i].norm;
    to.running_mean = from.running_mean;
    to.running_var = from.running_var;
    to.stats_initialized = from.stats_initialized;
  }
}

}  // namespace gpstate
