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

#include "gpstate/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace gpstate {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"grid.dims", "1"},
      {"grid.nx", "auto"},
      {"grid.x_min", "auto"},
      {"grid.x_max", "auto"},
      {"grid.ny", "auto"},
      {"grid.y_min", "auto"},
      {"grid.y_max", "auto"},
      {"potential.kind", "harmonic"},
      {"potential.second", "same"},
      {"problem.two_component", "false"},
      {"problem.g", "0"},
      {"problem.g11", "103"},
      {"problem.g12", "100"},
      {"problem.g22", "97"},
      {"problem.omega", "-1"},
      {"solver.dt", "1e-3"},
      {"solver.iterations", "20000"},
      {"solver.tolerance", "none"},
      {"solver.snapshot_every", "100"},
      {"plan.parameter", "auto"},
      {"plan.segments", "0:100:6:grid"},
      {"plan.seed", "0"},
      {"net.channels", "auto"},
      {"net.kernel", "3"},
      {"net.dilations", "1,2,4,8,16,1"},
      {"net.leaky_slope", "0.01"},
      {"net.normalize_inputs", "true"},
      {"net.seed", "0"},
      {"train.lr", "1e-3"},
      {"train.batch_size", "64"},
      {"train.epochs", "10"},
      {"train.seed", "0"},
      {"train.shuffle", "true"},
      {"train.val_fraction", "0.1"},
      {"train.split_seed", "0"},
      {"train.lr_decay_every", "0"},
      {"train.lr_decay_factor", "0.5"},
      {"run.workers", "auto"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

// Preset domains per dimension and potential family.
struct Preset {
  double x_min, x_max;
  long nx;
  double y_min, y_max;
  long ny;
};

Preset preset_for(int dims, const std::string& potential) {
  if (dims == 1) {
    if (starts_with(potential, "latticeA")) return {-8, 8, 512, 0, 1, 1};
    return {-12, 12, 512, 0, 1, 1};
  }
  if (starts_with(potential, "latticeB")) return {-7, 7, 256, -3.5, 3.5, 128};
  return {-7.5, 7.5, 256, -7.5, 7.5, 256};
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("config: unknown key '" + key + "'");
  it->second = trim(value);
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("config: unknown key '" + key + "'");
  return it->second;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

void RunConfig::merge_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(source + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (!has(key))
      throw ValidationError(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    set(key, line.substr(eq + 1));
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path);
}

double RunConfig::number(const std::string& key) const {
  const std::string v = resolved(key);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ValidationError("config: key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long RunConfig::integer(const std::string& key) const {
  const std::string v = resolved(key);
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ValidationError("config: key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool RunConfig::boolean(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::string RunConfig::resolved(const std::string& key) const {
  const std::string& v = get(key);
  if (v != "auto") return v;
  const auto fmt = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  if (starts_with(key, "grid.")) {
    const int d = dims();
    const Preset p = preset_for(d, get("potential.kind"));
    if (key == "grid.nx") return std::to_string(p.nx);
    if (key == "grid.x_min") return fmt(p.x_min);
    if (key == "grid.x_max") return fmt(p.x_max);
    if (key == "grid.ny") return std::to_string(p.ny);
    if (key == "grid.y_min") return fmt(p.y_min);
    if (key == "grid.y_max") return fmt(p.y_max);
  }
  if (key == "plan.parameter") return two_component() ? "omega" : "g";
  if (key == "net.channels") return dims() == 1 ? "32" : "16";
  if (key == "run.workers") {
    const unsigned hw = std::thread::hardware_concurrency();
    return std::to_string(hw == 0 ? 1 : hw);
  }
  throw ValidationError("config: key '" + key + "' has no automatic value");
}

int RunConfig::dims() const {
  const std::string& v = get("grid.dims");
  if (v == "1") return 1;
  if (v == "2") return 2;
  throw ValidationError("config: key 'grid.dims' must be 1 or 2, got '" + v + "'");
}

bool RunConfig::two_component() const { return boolean("problem.two_component"); }

int RunConfig::workers() const {
  if (const char* env = std::getenv("GPSTATE_WORKERS"); env && *env) {
    const std::string v = env;
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || out < 1)
      throw ValidationError("GPSTATE_WORKERS must be a positive integer, got '" + v + "'");
    return out;
  }
  const long w = integer("run.workers");
  if (w < 1) throw ValidationError("config: key 'run.workers' must be positive");
  return static_cast<int>(w);
}

GridPtr<double> RunConfig::grid() const {
  const int d = dims();
  std::vector<AxisSpec<double>> axes{{number("grid.x_min"), number("grid.x_max"), integer("grid.nx")}};
  if (d == 2) axes.push_back({number("grid.y_min"), number("grid.y_max"), integer("grid.ny")});
  return make_grid<double>(d, axes);
}

ProblemTemplate RunConfig::problem() const {
  const auto g = grid();
  const int d = dims();
  const auto v1 = parse_potential<double>(get("potential.kind"), d);
  if (!two_component()) return SingleProblemD{g, v1, number("problem.g")};
  const std::string& second = get("potential.second");
  const auto v2 = second == "same" ? v1 : parse_potential<double>(second, d);
  return TwoComponentProblemD{g,
                              v1,
                              v2,
                              number("problem.g11"),
                              number("problem.g12"),
                              number("problem.g22"),
                              number("problem.omega")};
}

EvolutionConfigD RunConfig::solver() const {
  EvolutionConfigD c;
  c.dtau = number("solver.dt");
  c.iterations = integer("solver.iterations");
  if (get("solver.tolerance") != "none") c.tolerance = number("solver.tolerance");
  c.snapshot_every = integer("solver.snapshot_every");
  if (!(c.dtau > 0)) throw ValidationError("config: key 'solver.dt' must be positive");
  if (c.iterations <= 0) throw ValidationError("config: key 'solver.iterations' must be positive");
  if (c.snapshot_every <= 0) throw ValidationError("config: key 'solver.snapshot_every' must be positive");
  if (c.tolerance && !(*c.tolerance > 0))
    throw ValidationError("config: key 'solver.tolerance' must be positive or 'none'");
  return c;
}

SamplingPlan RunConfig::plan() const {
  return parse_plan(resolved("plan.parameter"), get("plan.segments"),
                    static_cast<std::uint64_t>(integer("plan.seed")));
}

NetConfig RunConfig::net() const {
  NetConfig n;
  n.spatial_dims = dims();
  n.channels = integer("net.channels");
  n.kernel = integer("net.kernel");
  n.dilations.clear();
  std::stringstream ss(get("net.dilations"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    long d = 0;
    const std::string t = trim(item);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), d);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw ValidationError("config: key 'net.dilations' has a bad entry '" + item + "'");
    n.dilations.push_back(d);
  }
  n.leaky_slope = number("net.leaky_slope");
  n.seed = static_cast<std::uint64_t>(integer("net.seed"));
  return n;
}

TrainConfig RunConfig::train() const {
  TrainConfig t;
  t.adam.lr = number("train.lr");
  t.batch_size = integer("train.batch_size");
  t.epochs = integer("train.epochs");
  t.seed = static_cast<std::uint64_t>(integer("train.seed"));
  t.shuffle = boolean("train.shuffle");
  t.lr_decay_every = integer("train.lr_decay_every");
  t.lr_decay_factor = number("train.lr_decay_factor");
  t.validate();
  return t;
}

double RunConfig::val_fraction() const {
  const double f = number("train.val_fraction");
  if (!(f > 0.0 && f < 1.0)) throw ValidationError("config: key 'train.val_fraction' must be in (0, 1)");
  return f;
}

std::uint64_t RunConfig::split_seed() const { return static_cast<std::uint64_t>(integer("train.split_seed")); }

std::string RunConfig::resolved_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) {
    if (k == "run.workers") {
      os << k << " = " << workers() << '\n';
      continue;
    }
    os << k << " = " << (v == "auto" ? resolved(k) : v) << '\n';
  }
  return os.str();
}

}  // namespace gpstate
