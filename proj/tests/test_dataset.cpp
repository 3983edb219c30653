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

#include <gtest/gtest.h>

#include <filesystem>

#include "gpstate/dataset.hpp"

using namespace gpstate;

namespace {

EvolutionConfigD quick_solver(long iterations = 2000) {
  EvolutionConfigD c;
  c.iterations = iterations;
  return c;
}

SingleProblemD harmonic_problem(Index n = 128) {
  return SingleProblemD{make_grid_1d(-12.0, 12.0, n), Harmonic1D<double>{1}, 0.0};
}

SamplingPlan grid_plan(double lo, double hi, long count) { return {"g", {{lo, hi, count}}, 0}; }

size_t record_stride(const Dataset& d) {
  return (d.header.scalar_names.size() + static_cast<size_t>(d.header.components * d.header.grid_size())) * 8 + 4;
}

}  // namespace

TEST(Plan, GridSegmentIsEndpointInclusive) {
  const auto v = expand_plan(grid_plan(0, 500, 6));
  EXPECT_EQ(v, (std::vector<double>{0, 100, 200, 300, 400, 500}));
}

TEST(Plan, ReferencePlans) {
  const auto single = single_component_reference_plan();
  const auto v = expand_plan(single);
  EXPECT_EQ(v.size(), 50000u);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), 500.0);
  const auto two = two_component_reference_plan();
  EXPECT_EQ(two.total(), 13000);
  const auto w = expand_plan(two);
  EXPECT_EQ(std::count_if(w.begin(), w.end(), [](double x) { return x >= -2.0; }) >= 3000, true);
  EXPECT_EQ(*std::min_element(w.begin(), w.end()), -20.0);
  EXPECT_EQ(*std::max_element(w.begin(), w.end()), 0.0);
}

TEST(Plan, ParseFormatRoundTripAndRandomSegments) {
  const auto p = parse_plan("omega", "-20:0:10;-2:0:4:random", 9);
  EXPECT_EQ(p.total(), 14);
  EXPECT_EQ(format_segments(p), "-20:0:10:grid;-2:0:4:random");
  const auto a = expand_plan(p), b = expand_plan(p);
  EXPECT_EQ(a, b);
  for (size_t i = 10; i < 14; ++i) {
    EXPECT_GE(a[i], -2.0);
    EXPECT_LT(a[i], 0.0);
  }
  EXPECT_THROW(parse_plan("g", "1:2", 0), ValidationError);
  EXPECT_THROW(parse_plan("g", "1:2:3:sobol", 0), ValidationError);
  EXPECT_THROW(expand_plan(grid_plan(2, 1, 3)), ValidationError);
  EXPECT_THROW(expand_plan(grid_plan(0, 1, 0)), ValidationError);
}

TEST(Split, PaperSizesAndDeterminism) {
  const auto s = split_train_val(50000, 0.1, 1);
  EXPECT_EQ(s.validation.size(), 5000u);
  EXPECT_EQ(s.train.size(), 45000u);
  EXPECT_EQ(split_train_val(13000, 0.1, 1).validation.size(), 1300u);
  const auto a = split_train_val(10, 0.2, 42), b = split_train_val(10, 0.2, 42);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  std::vector<Index> all = a.train;
  all.insert(all.end(), a.validation.begin(), a.validation.end());
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < 10; ++i) EXPECT_EQ(all[static_cast<size_t>(i)], i);
  EXPECT_EQ(split_train_val(3, 0.01, 0).validation.size(), 1u);
  EXPECT_THROW(split_train_val(1, 0.5, 0), ValidationError);
  EXPECT_THROW(split_train_val(10, 1.0, 0), ValidationError);
}

TEST(Generate, DeskPlanProducesValidRecords) {
  const auto d = generate_dataset(grid_plan(0, 100, 6), harmonic_problem(), quick_solver(), 2);
  ASSERT_EQ(d.size(), 6);
  EXPECT_NO_THROW(validate_dataset(d));
  for (Index i = 0; i < 6; ++i) {
    EXPECT_EQ(d.records[static_cast<size_t>(i)].targets.maxCoeff(), 1.0);
    EXPECT_EQ(d.input(i), 20.0 * static_cast<double>(i));
  }
  // g = 0 target is the max-normalized oscillator ground state.
  const auto grid = d.header.grid();
  const Eigen::ArrayXd gauss = (-0.5 * grid->x().square()).exp();
  EXPECT_LT((d.records[0].targets.col(0) - gauss).abs().maxCoeff(), 1e-5);
  // Provenance: stored energy is the quotient of the stored state.
  EXPECT_NEAR(d.scalar(0, provenance::kEnergy), 0.5, 5e-4);
  EXPECT_EQ(d.scalar(0, provenance::kIterations), 2000.0);
  EXPECT_EQ(d.scalar(0, provenance::kTimeStep), 1e-3);
  // Peak density falls as repulsion spreads the cloud.
  for (Index i = 1; i < 6; ++i)
    EXPECT_LT(d.scalar(i, provenance::kPeakDensity), d.scalar(i - 1, provenance::kPeakDensity));
}

TEST(Generate, ProblemRebuiltFromRecord) {
  const auto d = generate_dataset(grid_plan(10, 10, 1), harmonic_problem(64), quick_solver(500), 1);
  const auto p = std::get<SingleProblemD>(problem_for_record(d, 0));
  EXPECT_EQ(p.g, 10.0);
  EXPECT_EQ(*p.grid, *d.header.grid());
  EXPECT_EQ(potential_name(p.potential), "harmonic(1)");
}

TEST(Generate, TwoComponentRecordsCarryBothTargets) {
  const TwoComponentProblemD tp{make_grid_1d(-8.0, 8.0, 64), LatticeA<double>{24}, LatticeA<double>{24},
                                103, 100, 97, -1};
  const auto d = generate_dataset({"omega", {{-1.0, -1e-3, 3}}, 0}, tp, quick_solver(500), 2);
  EXPECT_EQ(d.header.components, 2);
  EXPECT_EQ(d.header.scalar_names[0], "omega");
  for (const auto& r : d.records) {
    EXPECT_EQ(r.targets.cols(), 2);
    EXPECT_EQ(r.targets.maxCoeff(), 1.0);
  }
  EXPECT_NO_THROW(validate_dataset(d));
  const auto p = std::get<TwoComponentProblemD>(problem_for_record(d, 2));
  EXPECT_EQ(p.omega, -1e-3);
  EXPECT_EQ(p.g22, 97.0);
}

TEST(Generate, WorkerCountDoesNotChangeBytes) {
  const auto plan = grid_plan(0, 50, 9);
  const auto one = serialize_dataset(generate_dataset(plan, harmonic_problem(64), quick_solver(300), 1));
  for (int w : {2, 8})
    EXPECT_EQ(serialize_dataset(generate_dataset(plan, harmonic_problem(64), quick_solver(300), w)), one) << w;
}

TEST(Generate, FailureReportsIndexAndManifest) {
  SamplingPlan plan{"g", {{0, 10, 3}, {-1e9, -1e9, 1}, {20, 30, 2}}, 0};
  try {
    generate_dataset(plan, harmonic_problem(64), quick_solver(100), 1);
    FAIL() << "expected failure";
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.failed_index(), 3);
    EXPECT_EQ(e.completed(), (std::vector<Index>{0, 1, 2}));
    const auto m = e.manifest(6);
    EXPECT_NE(m.find("3 of 6"), std::string::npos) << m;
  }
}

TEST(Format, RoundTripIsBitExact) {
  const auto d = generate_dataset(grid_plan(0, 100, 4), harmonic_problem(64), quick_solver(300), 1);
  const auto bytes = serialize_dataset(d);
  const auto back = deserialize_dataset(bytes);
  EXPECT_TRUE(back.header.same_layout(d.header));
  ASSERT_EQ(back.size(), d.size());
  for (size_t i = 0; i < d.records.size(); ++i) {
    EXPECT_EQ(back.records[i].scalars, d.records[i].scalars);
    EXPECT_TRUE((back.records[i].targets == d.records[i].targets).all());
  }
  EXPECT_EQ(serialize_dataset(back), bytes);

  const auto path = (std::filesystem::temp_directory_path() / "gpstate_roundtrip.gpds").string();
  save_dataset(d, path);
  EXPECT_EQ(serialize_dataset(load_dataset(path)), bytes);
  std::filesystem::remove(path);
  EXPECT_THROW(load_dataset(path), IoError);
}

TEST(Format, TruncationNamesSizes) {
  const auto d = generate_dataset(grid_plan(0, 100, 3), harmonic_problem(64), quick_solver(100), 1);
  auto bytes = serialize_dataset(d);
  const auto full = bytes.size();
  bytes.resize(full - 5);
  try {
    deserialize_dataset(bytes);
    FAIL() << "expected size error";
  } catch (const IoError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(std::to_string(full)), std::string::npos) << msg;
    EXPECT_NE(msg.find(std::to_string(full - 5)), std::string::npos) << msg;
  }
  EXPECT_THROW(deserialize_dataset("GPDX"), IoError);
}

TEST(Format, CorruptedRecordIsNamed) {
  const auto d = generate_dataset(grid_plan(0, 90, 10), harmonic_problem(64), quick_solver(100), 1);
  auto bytes = serialize_dataset(d);
  const size_t stride = record_stride(d);
  const size_t header = bytes.size() - 10 * stride;
  bytes[header + 7 * stride + 100] ^= 0x01;
  try {
    deserialize_dataset(bytes);
    FAIL() << "expected checksum error";
  } catch (const ChecksumError& e) {
    EXPECT_EQ(e.record(), 7);
    EXPECT_NE(std::string(e.what()).find("record 7"), std::string::npos);
  }
}

TEST(Validate, RejectsBadTargets) {
  auto d = generate_dataset(grid_plan(0, 10, 2), harmonic_problem(64), quick_solver(100), 1);
  auto bad = d;
  bad.records[1].targets(3, 0) = 1.5;
  EXPECT_THROW(validate_dataset(bad), ValidationError);
  bad = d;
  bad.records[0].targets *= 0.5;
  EXPECT_THROW(validate_dataset(bad), ValidationError);
}

TEST(Export, CsvHasOneRowPerRecord) {
  const auto d = generate_dataset(grid_plan(0, 10, 3), harmonic_problem(64), quick_solver(100), 1);
  const auto csv = dataset_to_csv(d);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);  // header + 3 rows
  EXPECT_EQ(csv.rfind("g,", 0), 0u);
}
