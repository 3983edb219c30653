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

#include "gpstate/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "binary_io.hpp"

namespace gpstate {

namespace {

constexpr char kMagic[4] = {'G', 'P', 'D', 'S'};
constexpr std::uint16_t kVersion = 1;

std::vector<std::string> split_string(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

long SamplingPlan::total() const {
  long n = 0;
  for (const auto& s : segments) n += s.count;
  return n;
}

std::vector<double> expand_plan(const SamplingPlan& plan) {
  if (plan.segments.empty() || plan.total() <= 0) throw ValidationError("plan: empty sampling plan");
  std::mt19937_64 rng(plan.seed);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(plan.total()));
  for (const auto& s : plan.segments) {
    if (s.count <= 0) throw ValidationError("plan: segment count must be positive");
    if (!std::isfinite(s.lo) || !std::isfinite(s.hi) || s.hi < s.lo)
      throw ValidationError("plan: segment range must be finite with lo <= hi");
    for (long i = 0; i < s.count; ++i) {
      if (s.spacing == Spacing::UniformGrid) {
        if (s.count == 1) {
          values.push_back(s.lo);
        } else if (i == s.count - 1) {
          values.push_back(s.hi);
        } else {
          values.push_back(s.lo + (s.hi - s.lo) * static_cast<double>(i) / static_cast<double>(s.count - 1));
        }
      } else {
        values.push_back(s.lo + (s.hi - s.lo) * uniform01(rng));
      }
    }
  }
  return values;
}

SamplingPlan parse_plan(const std::string& parameter, const std::string& segments, std::uint64_t seed) {
  SamplingPlan plan;
  plan.parameter = parameter;
  plan.seed = seed;
  for (const auto& seg : split_string(segments, ';')) {
    if (seg.empty()) continue;
    const auto parts = split_string(seg, ':');
    if (parts.size() < 3 || parts.size() > 4)
      throw ValidationError("plan: segment '" + seg + "' is not lo:hi:count[:grid|random]");
    PlanSegment s;
    try {
      s.lo = std::stod(parts[0]);
      s.hi = std::stod(parts[1]);
      s.count = std::stol(parts[2]);
    } catch (const std::exception&) {
      throw ValidationError("plan: cannot parse segment '" + seg + "'");
    }
    if (parts.size() == 4) {
      if (parts[3] == "grid")
        s.spacing = Spacing::UniformGrid;
      else if (parts[3] == "random")
        s.spacing = Spacing::UniformRandom;
      else
        throw ValidationError("plan: unknown spacing '" + parts[3] + "'");
    }
    plan.segments.push_back(s);
  }
  if (plan.segments.empty()) throw ValidationError("plan: empty sampling plan");
  return plan;
}

std::string format_segments(const SamplingPlan& plan) {
  std::ostringstream os;
  for (size_t i = 0; i < plan.segments.size(); ++i) {
    const auto& s = plan.segments[i];
    if (i) os << ';';
    os << format_double(s.lo) << ':' << format_double(s.hi) << ':' << s.count << ':'
       << (s.spacing == Spacing::UniformGrid ? "grid" : "random");
  }
  return os.str();
}

SamplingPlan single_component_reference_plan() { return {"g", {{0.0, 500.0, 50000}}, 0}; }

SamplingPlan two_component_reference_plan() {
  return {"omega", {{-20.0, 0.0, 10000}, {-2.0, 0.0, 3000}}, 0};
}

ProblemTemplate with_parameter(const ProblemTemplate& base, const std::string& parameter, double value) {
  if (const auto* s = std::get_if<SingleProblemD>(&base)) {
    if (parameter != "g") throw ValidationError("plan: single-component sweeps take parameter 'g'");
    auto p = *s;
    p.g = value;
    return p;
  }
  auto p = std::get<TwoComponentProblemD>(base);
  if (parameter == "omega")
    p.omega = value;
  else if (parameter == "g11")
    p.g11 = value;
  else if (parameter == "g12")
    p.g12 = value;
  else if (parameter == "g22")
    p.g22 = value;
  else
    throw ValidationError("plan: two-component sweeps take 'omega', 'g11', 'g12' or 'g22'");
  return p;
}

GridPtr<double> DatasetHeader::grid() const {
  if (dims == 1) return make_grid<double>(1, {x});
  return make_grid<double>(2, {x, y});
}

bool DatasetHeader::same_layout(const DatasetHeader& o) const {
  return dims == o.dims && x.min == o.x.min && x.max == o.x.max && x.points == o.x.points &&
         y.min == o.y.min && y.max == o.y.max && y.points == o.y.points && components == o.components &&
         input_count == o.input_count && scalar_names == o.scalar_names && potential == o.potential;
}

Index Dataset::scalar_index(const std::string& name) const {
  const auto& n = header.scalar_names;
  const auto it = std::find(n.begin(), n.end(), name);
  if (it == n.end()) throw ValidationError("dataset: no scalar column '" + name + "'");
  return static_cast<Index>(it - n.begin());
}

double Dataset::scalar(Index record, const std::string& name) const {
  return records.at(static_cast<size_t>(record)).scalars[static_cast<size_t>(scalar_index(name))];
}

DatasetHeader make_header(const ProblemTemplate& problem, const std::string& parameter) {
  DatasetHeader h;
  const auto& grid = *problem_grid(problem);
  h.dims = grid.dims();
  h.x = grid.axis(0);
  h.y = grid.dims() == 2 ? grid.axis(1) : AxisSpec<double>{0.0, 1.0, 1};
  h.input_count = 1;
  if (const auto* s = std::get_if<SingleProblemD>(&problem)) {
    if (parameter != "g") throw ValidationError("dataset: single-component sweeps take parameter 'g'");
    h.components = 1;
    h.scalar_names = {"g"};
    h.potential = potential_name(s->potential);
  } else {
    const auto& t = std::get<TwoComponentProblemD>(problem);
    h.components = 2;
    std::vector<std::string> coeffs{"omega", "g11", "g12", "g22"};
    if (std::find(coeffs.begin(), coeffs.end(), parameter) == coeffs.end())
      throw ValidationError("dataset: unknown two-component parameter '" + parameter + "'");
    h.scalar_names = {parameter};
    for (const auto& c : coeffs)
      if (c != parameter) h.scalar_names.push_back(c);
    const auto a = potential_name(t.potential1);
    const auto b = potential_name(t.potential2);
    h.potential = a == b ? a : a + "|" + b;
  }
  for (const char* p : {provenance::kEnergy, provenance::kEnergyFunctional, provenance::kPeakDensity,
                        provenance::kIterations, provenance::kTimeStep})
    h.scalar_names.emplace_back(p);
  return h;
}

SampleRecord make_record(double parameter, const SingleProblemD& problem, const GroundState<double>& state,
                         const EvolutionConfigD& config) {
  SampleRecord r;
  const Eigen::ArrayXXd amp = max_normalize(state.field);
  r.targets = Eigen::Map<const Eigen::ArrayXd>(amp.data(), amp.size());
  const auto terms = energy_terms(normalize_l2(FieldD::from_real(problem.grid, amp)), problem);
  r.scalars = {parameter,
               terms.quotient(),
               terms.functional(),
               state.field.values.abs2().maxCoeff(),
               static_cast<double>(state.iterations),
               config.dtau};
  return r;
}

SampleRecord make_record(double parameter, const TwoComponentProblemD& problem,
                         const TwoComponentGroundState<double>& state, const EvolutionConfigD& config) {
  (void)parameter;
  SampleRecord r;
  const auto [a, b] = max_normalize(state.field);
  r.targets.resize(a.size(), 2);
  r.targets.col(0) = Eigen::Map<const Eigen::ArrayXd>(a.data(), a.size());
  r.targets.col(1) = Eigen::Map<const Eigen::ArrayXd>(b.data(), b.size());
  const double peak = (state.field.first.abs2() + state.field.second.abs2()).maxCoeff();
  const auto terms = energy_terms(
      normalize_l2(TwoComponentFieldD(problem.grid, a.cast<std::complex<double>>(), b.cast<std::complex<double>>())),
      problem);
  r.scalars = {problem.omega, problem.g11, problem.g12, problem.g22};
  r.scalars.insert(r.scalars.end(), {terms.quotient(), terms.functional(), peak,
                                     static_cast<double>(state.iterations), config.dtau});
  return r;
}

std::string GenerationError::manifest(Index total) const {
  std::vector<std::string> status(static_cast<size_t>(total), "pending");
  for (Index i : completed_) status[static_cast<size_t>(i)] = "done";
  if (failed_ >= 0 && failed_ < total) status[static_cast<size_t>(failed_)] = "failed";
  std::ostringstream os;
  os << "# partial dataset manifest: " << completed_.size() << " of " << total << " records completed\n";
  os << "# failure: " << what() << "\n";
  for (Index i = 0; i < total; ++i) os << i << ' ' << status[static_cast<size_t>(i)] << '\n';
  return os.str();
}

namespace {

SampleRecord solve_record(const ProblemTemplate& base, const std::string& parameter, double value,
                          const EvolutionConfigD& config) {
  const auto problem = with_parameter(base, parameter, value);
  if (const auto* s = std::get_if<SingleProblemD>(&problem))
    return make_record(value, *s, solve_ground_single(*s, config), config);
  const auto& t = std::get<TwoComponentProblemD>(problem);
  auto rec = make_record(value, t, solve_ground_two(t, config), config);
  // Put the swept coefficient first, then the remaining ones in canonical order.
  if (parameter != "omega") {
    const std::vector<std::string> coeffs{"omega", "g11", "g12", "g22"};
    std::vector<double> reordered{value};
    for (size_t k = 0; k < coeffs.size(); ++k)
      if (coeffs[k] != parameter) reordered.push_back(rec.scalars[k]);
    std::copy(reordered.begin(), reordered.end(), rec.scalars.begin());
  }
  return rec;
}

}  // namespace

Dataset generate_dataset(const SamplingPlan& plan, const ProblemTemplate& problem,
                         const EvolutionConfigD& config, int workers, const ProgressFn& progress) {
  const auto values = expand_plan(plan);
  Dataset ds;
  ds.header = make_header(problem, plan.parameter);
  const Index total = static_cast<Index>(values.size());
  ds.records.resize(values.size());

  std::vector<char> done(values.size(), 0);
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  Index failed_index = -1;
  std::string failure;
  Index finished = 0;

  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const Index i = next.fetch_add(1);
      if (i >= total) return;
      try {
        auto rec = solve_record(problem, plan.parameter, values[static_cast<size_t>(i)], config);
        std::lock_guard<std::mutex> lock(mu);
        ds.records[static_cast<size_t>(i)] = std::move(rec);
        done[static_cast<size_t>(i)] = 1;
        ++finished;
        if (progress) progress(finished, total);
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failed.exchange(true) || i < failed_index) {
          failed_index = i;
          failure = "record " + std::to_string(i) + " (" + plan.parameter + " = " +
                    format_double(values[static_cast<size_t>(i)]) + "): " + e.what();
        }
        return;
      }
    }
  };

  const int n = std::max(1, workers);
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed) {
    std::vector<Index> completed;
    for (Index i = 0; i < total; ++i)
      if (done[static_cast<size_t>(i)]) completed.push_back(i);
    throw GenerationError("dataset generation failed at " + failure, failed_index, std::move(completed));
  }
  return ds;
}

Split split_train_val(Index count, double val_fraction, std::uint64_t seed) {
  if (count < 2) throw ValidationError("split: dataset too small (need at least 2 records)");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ValidationError("split: validation fraction must lie in (0, 1)");
  Index n_val = static_cast<Index>(std::llround(val_fraction * static_cast<double>(count)));
  n_val = std::clamp<Index>(n_val, 1, count - 1);
  std::vector<Index> perm(static_cast<size_t>(count));
  for (Index i = 0; i < count; ++i) perm[static_cast<size_t>(i)] = i;
  // Fisher-Yates with a fixed bounded-draw scheme so the split depends on the seed only.
  std::mt19937_64 rng(seed);
  for (Index i = count - 1; i > 0; --i) {
    const auto j = static_cast<Index>(uniform01(rng) * static_cast<double>(i + 1));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(std::min(j, i))]);
  }
  Split s;
  s.validation.assign(perm.begin(), perm.begin() + n_val);
  s.train.assign(perm.begin() + n_val, perm.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

// Layout:
//   "GPDS" u16 version u16 dims u16 components u16 input_count u16 scalar_count u16 reserved
//   u32 nx u32 ny f64 x_min f64 x_max f64 y_min f64 y_max u64 record_count
//   scalar_count x (u16 len, bytes) name; (u16 len, bytes) potential
//   records: (scalar_count + components * nx * ny) f64 values, u32 crc32 of those bytes
std::string serialize_dataset(const Dataset& d) {
  const auto& h = d.header;
  io::ByteWriter w;
  w.bytes(std::string(kMagic, 4));
  w.u16(kVersion);
  w.u16(static_cast<std::uint16_t>(h.dims));
  w.u16(static_cast<std::uint16_t>(h.components));
  w.u16(static_cast<std::uint16_t>(h.input_count));
  w.u16(static_cast<std::uint16_t>(h.scalar_names.size()));
  w.u16(0);
  w.u32(static_cast<std::uint32_t>(h.x.points));
  w.u32(static_cast<std::uint32_t>(h.y.points));
  w.f64(h.x.min);
  w.f64(h.x.max);
  w.f64(h.y.min);
  w.f64(h.y.max);
  w.u64(static_cast<std::uint64_t>(d.records.size()));
  for (const auto& n : h.scalar_names) w.str(n);
  w.str(h.potential);
  const Index values = static_cast<Index>(h.components) * h.grid_size();
  for (size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    if (r.scalars.size() != h.scalar_names.size() || r.targets.size() != values)
      throw ValidationError("dataset: record " + std::to_string(i) + " does not match the header layout");
    const size_t start = w.size();
    for (double v : r.scalars) w.f64(v);
    for (Index k = 0; k < r.targets.size(); ++k) w.f64(r.targets.data()[k]);
    w.u32(io::crc32_of(w.data().data() + start, w.size() - start));
  }
  return w.data();
}

Dataset deserialize_dataset(const std::string& bytes) {
  io::ByteReader r(bytes, "dataset");
  if (bytes.size() < 4 || r.bytes(4) != std::string(kMagic, 4))
    throw IoError("dataset: bad magic (expected GPDS)");
  const auto version = r.u16();
  if (version != kVersion)
    throw IoError("dataset: unsupported format version " + std::to_string(version));
  Dataset d;
  auto& h = d.header;
  h.dims = r.u16();
  h.components = r.u16();
  h.input_count = r.u16();
  const auto scalar_count = r.u16();
  r.u16();
  h.x.points = r.u32();
  h.y.points = r.u32();
  h.x.min = r.f64();
  h.x.max = r.f64();
  h.y.min = r.f64();
  h.y.max = r.f64();
  const auto count = r.u64();
  for (int i = 0; i < scalar_count; ++i) h.scalar_names.push_back(r.str());
  h.potential = r.str();
  if (h.dims < 1 || h.dims > 2 || h.components < 1 || h.components > 2 || h.input_count < 1 ||
      h.input_count > scalar_count)
    throw IoError("dataset: inconsistent header");

  const size_t per_record = static_cast<size_t>(scalar_count) +
                            static_cast<size_t>(h.components) * static_cast<size_t>(h.grid_size());
  const size_t stride = per_record * 8 + 4;
  const size_t expected = r.pos() + stride * count;
  if (bytes.size() != expected)
    throw IoError("dataset: file size " + std::to_string(bytes.size()) + " does not match header (expected " +
                  std::to_string(expected) + " bytes for " + std::to_string(count) + " records)");
  d.records.resize(count);
  for (size_t i = 0; i < count; ++i) {
    const size_t start = r.pos();
    auto& rec = d.records[i];
    rec.scalars.resize(scalar_count);
    for (auto& v : rec.scalars) v = r.f64();
    rec.targets.resize(h.grid_size(), h.components);
    for (Index k = 0; k < rec.targets.size(); ++k) rec.targets.data()[k] = r.f64();
    const auto stored = r.u32();
    if (io::crc32_of(bytes.data() + start, per_record * 8) != stored)
      throw ChecksumError("dataset: checksum mismatch in record " + std::to_string(i),
                          static_cast<long long>(i));
  }
  return d;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  io::write_file(path, serialize_dataset(dataset));
}

Dataset load_dataset(const std::string& path) {
  try {
    return deserialize_dataset(io::read_file(path));
  } catch (const ChecksumError& e) {
    throw ChecksumError(std::string(e.what()) + " of '" + path + "'", e.record());
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + " ('" + path + "')");
  }
}

void validate_dataset(const Dataset& d) {
  const auto& h = d.header;
  if (h.scalar_names.size() < static_cast<size_t>(h.input_count))
    throw ValidationError("dataset: fewer scalar columns than inputs");
  for (size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    const std::string where = "dataset: record " + std::to_string(i);
    if (r.scalars.size() != h.scalar_names.size()) throw ValidationError(where + " has wrong scalar count");
    if (r.targets.rows() != h.grid_size() || r.targets.cols() != h.components)
      throw ValidationError(where + " target shape does not match grid");
    if (!r.targets.allFinite()) throw ValidationError(where + " has non-finite targets");
    if (r.targets.minCoeff() < 0.0 || r.targets.maxCoeff() > 1.0)
      throw ValidationError(where + " targets leave [0, 1]");
    if (r.targets.maxCoeff() != 1.0) throw ValidationError(where + " targets are not max-normalized");
  }
}

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& h = d.header;
  for (size_t k = 0; k < h.scalar_names.size(); ++k) os << (k ? "," : "") << h.scalar_names[k];
  for (int c = 0; c < h.components; ++c)
    for (Index p = 0; p < h.grid_size(); ++p) os << ",psi" << (c + 1) << "_" << p;
  os << '\n';
  for (const auto& r : d.records) {
    for (size_t k = 0; k < r.scalars.size(); ++k) os << (k ? "," : "") << r.scalars[k];
    for (Index k = 0; k < r.targets.size(); ++k) os << ',' << r.targets.data()[k];
    os << '\n';
  }
  return os.str();
}

ProblemTemplate problem_for_record(const Dataset& d, Index i) {
  const auto& h = d.header;
  const auto grid = h.grid();
  const auto parse = [&](const std::string& text) {
    if (text == "custom") throw ValidationError("dataset: tabulated potentials cannot be rebuilt from a file");
    return parse_potential<double>(text, h.dims);
  };
  if (h.components == 1) {
    SingleProblemD p;
    p.grid = grid;
    p.potential = parse(h.potential);
    p.g = d.scalar(i, "g");
    return p;
  }
  TwoComponentProblemD p;
  p.grid = grid;
  const auto bar = h.potential.find('|');
  p.potential1 = parse(h.potential.substr(0, bar));
  p.potential2 = bar == std::string::npos ? p.potential1 : parse(h.potential.substr(bar + 1));
  p.omega = d.scalar(i, "omega");
  p.g11 = d.scalar(i, "g11");
  p.g12 = d.scalar(i, "g12");
  p.g22 = d.scalar(i, "g22");
  return p;
}

}  // namespace gpstate
