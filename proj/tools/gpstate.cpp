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

// gpstate: ground-state solver, dataset builder and surrogate network CLI.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gpstate/checkpoint.hpp"
#include "gpstate/config.hpp"
#include "gpstate/dataset.hpp"
#include "gpstate/evaluator.hpp"
#include "gpstate/gradcheck.hpp"
#include "gpstate/trainer.hpp"

namespace fs = std::filesystem;
using namespace gpstate;

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;  // convenience flags mapped to config keys
  bool two_component = false;
};

RunConfig resolve(const Options& o) {
  RunConfig cfg;
  if (!o.config_file.empty()) cfg.merge_file(o.config_file);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : o.flags) cfg.set(k, v);
  if (o.two_component) cfg.set("problem.two_component", "true");
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void echo_config(const RunConfig& cfg, const fs::path& dir) {
  write_text(dir / "config.txt", "# resolved configuration\n" + cfg.resolved_text());
}

fs::path directory_of(const std::string& file) {
  const fs::path p = fs::path(file).parent_path();
  return p.empty() ? fs::path(".") : p;
}

// Columns: x[,y], one amplitude per component.
std::string profile_csv(const Grid<double>& grid, const std::vector<Eigen::ArrayXXd>& amps) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "x";
  if (grid.dims() == 2) os << ",y";
  if (amps.size() == 1) {
    os << ",amp";
  } else {
    for (size_t c = 0; c < amps.size(); ++c) os << ",amp" << c + 1;
  }
  os << '\n';
  for (Index j = 0; j < grid.ny(); ++j)
    for (Index i = 0; i < grid.nx(); ++i) {
      os << grid.x()(i);
      if (grid.dims() == 2) os << ',' << grid.y()(j);
      for (const auto& a : amps) os << ',' << a(i, j);
      os << '\n';
    }
  return os.str();
}

std::vector<Index> read_indices(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<Index> out;
  for (long v; in >> v;) out.push_back(v);
  return out;
}

std::string index_list(const std::vector<Index>& idx) {
  std::ostringstream os;
  for (Index i : idx) os << i << '\n';
  return os.str();
}

ProblemTemplate problem_from_meta(const ModelMeta& m, int components, const RunConfig& cfg) {
  std::vector<AxisSpec<double>> axes{m.x};
  if (m.dims == 2) axes.push_back(m.y);
  const auto grid = make_grid<double>(m.dims, axes);
  const auto bar = m.potential.find('|');
  const auto v1 = parse_potential<double>(m.potential.substr(0, bar), m.dims);
  if (components == 1) return SingleProblemD{grid, v1, std::stod(cfg.get("problem.g"))};
  const auto v2 = bar == std::string::npos ? v1 : parse_potential<double>(m.potential.substr(bar + 1), m.dims);
  return TwoComponentProblemD{grid,
                              v1,
                              v2,
                              std::stod(cfg.get("problem.g11")),
                              std::stod(cfg.get("problem.g12")),
                              std::stod(cfg.get("problem.g22")),
                              std::stod(cfg.get("problem.omega"))};
}

double coefficient_value(const std::optional<double>& value, const ModelMeta& m, const RunConfig& cfg) {
  if (value) return *value;
  return std::stod(cfg.get("problem." + m.parameter));
}

int cmd_solve(const RunConfig& cfg, const std::string& out_dir) {
  const auto problem = cfg.problem();
  const auto solver = cfg.solver();
  Dataset data{make_header(problem, is_two_component(problem) ? "omega" : "g"), {}};
  const auto& grid = *problem_grid(problem);
  std::vector<Eigen::ArrayXXd> amps;
  double energy = 0, functional = 0;
  long iterations = 0;
  bool converged = false;
  if (const auto* s = std::get_if<SingleProblemD>(&problem)) {
    const auto gs = solve_ground_single(*s, solver);
    data.records.push_back(make_record(s->g, *s, gs, solver));
    amps.push_back(gs.field.values.abs());
    energy = gs.energy();
    functional = gs.terms.functional();
    iterations = gs.iterations;
    converged = gs.converged;
  } else {
    const auto& t = std::get<TwoComponentProblemD>(problem);
    const auto gs = solve_ground_two(t, solver);
    data.records.push_back(make_record(t.omega, t, gs, solver));
    amps.push_back(gs.field.first.abs());
    amps.push_back(gs.field.second.abs());
    energy = gs.energy();
    functional = gs.terms.functional();
    iterations = gs.iterations;
    converged = gs.converged;
  }
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  save_dataset(data, (dir / "state.gpds").string());
  write_text(dir / "profile.csv", profile_csv(grid, amps));
  echo_config(cfg, dir);
  std::cout << std::setprecision(12) << "energy = " << energy << '\n'
            << "energy_functional = " << functional << '\n'
            << "iterations = " << iterations << (converged ? " (converged)" : "") << '\n';
  return 0;
}

int cmd_generate(const RunConfig& cfg, const std::string& out, bool quiet) {
  const auto plan = cfg.plan();
  const auto problem = cfg.problem();
  const auto solver = cfg.solver();
  const int workers = cfg.workers();
  const auto dir = directory_of(out);
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  ProgressFn progress;
  if (!quiet)
    progress = [](Index done, Index total) {
      if (done == total || done % 50 == 0) std::cerr << "\rsolved " << done << "/" << total << std::flush;
    };
  try {
    const auto data = generate_dataset(plan, problem, solver, workers, progress);
    if (!quiet) std::cerr << '\n';
    save_dataset(data, out);
  } catch (const GenerationError& e) {
    write_text(fs::path(out).string() + ".manifest.txt", e.manifest(plan.total()));
    throw;
  }
  write_text(fs::path(out).string() + ".config.txt", "# resolved configuration\n" + cfg.resolved_text());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "wrote " << plan.total() << " records to " << out << " (" << std::setprecision(4) << secs
            << " s, " << workers << " workers)\n";
  return 0;
}

int cmd_inspect(const std::string& path) {
  const auto data = load_dataset(path);
  const auto& h = data.header;
  std::cout << std::setprecision(10);
  std::cout << "file:        " << path << '\n'
            << "dims:        " << h.dims << '\n'
            << "grid:        x[" << h.x.min << ", " << h.x.max << "] n=" << h.x.points;
  if (h.dims == 2) std::cout << " y[" << h.y.min << ", " << h.y.max << "] n=" << h.y.points;
  std::cout << '\n'
            << "components:  " << h.components << '\n'
            << "potential:   " << h.potential << '\n'
            << "parameter:   " << data.parameter_name() << '\n'
            << "records:     " << data.size() << '\n';
  std::cout << "scalars:    ";
  for (const auto& n : h.scalar_names) std::cout << ' ' << n;
  std::cout << '\n';
  if (data.size() > 0) {
    double lo = data.input(0), hi = lo;
    for (Index i = 1; i < data.size(); ++i) {
      lo = std::min(lo, data.input(i));
      hi = std::max(hi, data.input(i));
    }
    std::cout << "range:       [" << lo << ", " << hi << "]\n";
  }
  validate_dataset(data);
  std::cout << "validation:  ok\n";
  return 0;
}

int cmd_split(const RunConfig& cfg, const std::string& path, const std::string& out_dir) {
  const auto data = load_dataset(path);
  const auto split = split_train_val(data.size(), cfg.val_fraction(), cfg.split_seed());
  const fs::path dir(out_dir);
  write_text(dir / "train.txt", index_list(split.train));
  write_text(dir / "val.txt", index_list(split.validation));
  echo_config(cfg, dir);
  std::cout << "train " << split.train.size() << ", validation " << split.validation.size() << '\n';
  return 0;
}

Split load_or_make_split(const RunConfig& cfg, const Dataset& data, const std::string& split_dir) {
  if (split_dir.empty()) return split_train_val(data.size(), cfg.val_fraction(), cfg.split_seed());
  Split s{read_indices(fs::path(split_dir) / "train.txt"), read_indices(fs::path(split_dir) / "val.txt")};
  for (const auto* part : {&s.train, &s.validation})
    for (Index i : *part)
      if (i < 0 || i >= data.size()) throw ValidationError("split: index " + std::to_string(i) + " out of range");
  return s;
}

int cmd_train(const RunConfig& cfg, const std::string& data_path, const std::string& out_dir,
              const std::string& split_dir, bool quiet) {
  const auto data = load_dataset(data_path);
  const auto split = load_or_make_split(cfg, data, split_dir);
  NetConfig net_cfg = fit_net_config(data, cfg.net(), cfg.get("net.normalize_inputs") == "true");
  GroundStateNetD model(net_cfg);
  auto tc = cfg.train();
  tc.checkpoint_dir = out_dir;
  if (!quiet)
    tc.on_epoch = [](const EpochRecord& r) {
      std::cerr << std::setprecision(6) << "epoch " << r.epoch << " train " << r.train_loss << " val " << r.val_loss
                << " (" << std::setprecision(3) << r.seconds << " s)\n";
    };
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  echo_config(cfg, dir);
  write_text(dir / "split_train.txt", index_list(split.train));
  write_text(dir / "split_val.txt", index_list(split.validation));
  std::cout << "parameters: " << model.count_params() << '\n';
  const auto result = train(model, data, split, tc);
  std::cout << std::setprecision(10) << "best epoch " << result.report.best_epoch << ", validation loss "
            << result.report.best_val_loss << '\n'
            << "checkpoint " << result.best_checkpoint << '\n';
  return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& ckpt_path, std::optional<double> value,
                const std::string& out) {
  auto ckpt = load_checkpoint(ckpt_path);
  const auto& meta = ckpt.meta;
  const Index components = ckpt.model.config().out_channels;
  const double x = coefficient_value(value, meta, cfg);
  const auto problem = with_parameter(problem_from_meta(meta, static_cast<int>(components), cfg), meta.parameter, x);
  const auto& grid = *problem_grid(problem);
  const Matrix<double> input = Matrix<double>::Constant(1, ckpt.model.config().in_features, x);
  const auto amps = predict_arrays(ckpt.model, input, 0, grid.nx(), grid.ny());
  const std::string csv = profile_csv(grid, amps);
  if (out.empty() || out == "-") {
    std::cout << csv;
    return 0;
  }
  write_text(out, csv);
  echo_config(cfg, directory_of(out));
  double energy = 0;
  if (const auto* s = std::get_if<SingleProblemD>(&problem))
    energy = energy_single(postprocess_prediction(amps[0], problem_grid(problem)), *s);
  else
    energy = energy_two(postprocess_prediction(amps[0], amps[1], problem_grid(problem)),
                        std::get<TwoComponentProblemD>(problem));
  std::cout << std::setprecision(12) << meta.parameter << " = " << x << ", predicted energy = " << energy << '\n';
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& ckpt_path, const std::string& data_path,
             const std::string& split_dir, bool all, bool recompute, const std::string& out) {
  auto ckpt = load_checkpoint(ckpt_path);
  const auto data = load_dataset(data_path);
  std::vector<Index> indices;
  if (all) {
    indices.resize(static_cast<size_t>(data.size()));
    std::iota(indices.begin(), indices.end(), Index{0});
  } else {
    indices = load_or_make_split(cfg, data, split_dir).validation;
  }
  SweepOptions opts;
  opts.recompute = recompute;
  const auto report = sweep_report(ckpt.model, data, indices, opts);
  if (!out.empty()) {
    write_text(out, report.to_csv());
    echo_config(cfg, directory_of(out));
  }
  std::cout << std::setprecision(6) << "records " << report.rows.size() << ", median rel err "
            << report.median_rel_err << ", max rel err " << report.max_rel_err << '\n';
  return 0;
}

int cmd_bench(const RunConfig& cfg, const std::string& ckpt_path, std::optional<double> value, int runs) {
  auto ckpt = load_checkpoint(ckpt_path);
  const auto& meta = ckpt.meta;
  const double x = coefficient_value(value, meta, cfg);
  const auto base = problem_from_meta(meta, static_cast<int>(ckpt.model.config().out_channels), cfg);
  const auto problem = with_parameter(base, meta.parameter, x);
  const auto result = bench_speedup(ckpt.model, problem, cfg.solver(), x, runs);
  std::cout << result.to_text();
  return 0;
}

int cmd_probe(const RunConfig& cfg, const std::string& ckpt_path, const std::vector<double>& values) {
  auto ckpt = load_checkpoint(ckpt_path);
  const auto& meta = ckpt.meta;
  const auto base = problem_from_meta(meta, static_cast<int>(ckpt.model.config().out_channels), cfg);
  for (double v : values) std::cout << out_of_range_probe(ckpt.model, base, meta.parameter, v, cfg.solver()).to_text() << '\n';
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  const auto results = run_gradient_suite(seed);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "ok   " : "FAIL ") << std::left << std::setw(40) << r.name << std::setprecision(3)
              << std::scientific << r.rel_error << std::defaultfloat << '\n';
    failed += r.pass ? 0 : 1;
  }
  std::cout << results.size() - static_cast<size_t>(failed) << "/" << results.size() << " checks passed\n";
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of trapped condensates: imaginary-time solver and neural surrogate."};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_file, "key=value configuration file");
  app.add_option("--set", opt.sets, "override one key, e.g. --set solver.dt=1e-4")->take_all();
  const std::vector<std::pair<std::string, std::string>> shortcuts{
      {"--dims", "grid.dims"},          {"--potential", "potential.kind"}, {"--g", "problem.g"},
      {"--omega", "problem.omega"},     {"--g11", "problem.g11"},          {"--g12", "problem.g12"},
      {"--g22", "problem.g22"},         {"--dt", "solver.dt"},             {"--iterations", "solver.iterations"},
      {"--tolerance", "solver.tolerance"}, {"--nx", "grid.nx"},            {"--ny", "grid.ny"},
      {"--workers", "run.workers"},     {"--epochs", "train.epochs"},      {"--plan", "plan.segments"}};
  for (const auto& [flag, key] : shortcuts) {
    const std::string k = key;
    app.add_option_function<std::string>(
        flag, [&opt, k](const std::string& v) { opt.flags[k] = v; }, "sets " + k);
  }
  app.add_flag("--two-component", opt.two_component, "two coupled components");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress output");

  std::string out;
  auto* solve = app.add_subcommand("solve", "imaginary-time ground state of one Hamiltonian");
  std::string solve_dir = "gpstate_solve";
  solve->add_option("-o,--out", solve_dir, "output directory");

  auto* dataset = app.add_subcommand("dataset", "generate and manage datasets");
  dataset->require_subcommand(1);
  auto* gen = dataset->add_subcommand("generate", "solve every plan value");
  gen->add_option("-o,--out", out, "dataset file (.gpds)")->required();
  std::string data_path;
  auto* inspect = dataset->add_subcommand("inspect", "print header and validate");
  inspect->add_option("file", data_path)->required();
  auto* split = dataset->add_subcommand("split", "write train/validation index lists");
  split->add_option("file", data_path)->required();
  split->add_option("-o,--out", out, "output directory")->required();
  auto* export_csv = dataset->add_subcommand("export-csv", "dump records as CSV");
  export_csv->add_option("file", data_path)->required();
  export_csv->add_option("-o,--out", out, "CSV file")->required();

  std::string split_dir, checkpoint;
  auto* train_cmd = app.add_subcommand("train", "fit the surrogate network");
  train_cmd->add_option("--data", data_path)->required();
  train_cmd->add_option("-o,--out", out, "output directory")->required();
  train_cmd->add_option("--split", split_dir, "directory with train.txt and val.txt");

  std::optional<double> value;
  auto* predict = app.add_subcommand("predict", "predicted profile for one coefficient");
  predict->add_option("--checkpoint", checkpoint)->required();
  predict->add_option("--value", value, "coefficient (defaults to the matching problem.* key)");
  predict->add_option("-o,--out", out, "CSV file, '-' for stdout");

  bool all = false, recompute = false;
  auto* eval = app.add_subcommand("eval", "relative energy error sweep");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--data", data_path)->required();
  eval->add_option("--split", split_dir, "directory with val.txt");
  eval->add_flag("--all", all, "every record instead of the validation split");
  eval->add_flag("--recompute", recompute, "re-solve each record instead of using stored energies");
  eval->add_option("-o,--out", out, "report CSV");

  int runs = 11;
  auto* bench = app.add_subcommand("bench", "surrogate forward versus full solve timing");
  bench->add_option("--checkpoint", checkpoint)->required();
  bench->add_option("--value", value);
  bench->add_option("--runs", runs);

  std::vector<double> probe_values;
  auto* probe = app.add_subcommand("probe", "compare predictions with fresh solves, e.g. outside the training range");
  probe->add_option("--checkpoint", checkpoint)->required();
  probe->add_option("--values", probe_values)->required();

  std::uint64_t grad_seed = 0;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every layer");
  gradcheck->add_option("--seed", grad_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gradcheck) return cmd_gradcheck(grad_seed);
    const RunConfig cfg = resolve(opt);
    if (*solve) return cmd_solve(cfg, solve_dir);
    if (*gen) return cmd_generate(cfg, out, quiet);
    if (*inspect) return cmd_inspect(data_path);
    if (*split) return cmd_split(cfg, data_path, out);
    if (*export_csv) {
      write_text(out, dataset_to_csv(load_dataset(data_path)));
      return 0;
    }
    if (*train_cmd) return cmd_train(cfg, data_path, out, split_dir, quiet);
    if (*predict) return cmd_predict(cfg, checkpoint, value, out);
    if (*eval) return cmd_eval(cfg, checkpoint, data_path, split_dir, all, recompute, out);
    if (*bench) return cmd_bench(cfg, checkpoint, value, runs);
    if (*probe) return cmd_probe(cfg, checkpoint, probe_values);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
