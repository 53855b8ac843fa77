// Copyright 2026 The qchannel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <doctest.h>

#include "qchannel/maps.hpp"
#include "qchannel/mml.hpp"
#include "qchannel/tomography.hpp"

namespace {

using namespace qchannel;

AffineChannel grid_channel() {
  // Entries on a 0.01 grid so that 200-shot cells have integer expectations.
  Eigen::Matrix3d T;
  T << 0.50, 0.10, -0.20, 0.00, 0.40, 0.05, -0.10, 0.15, 0.30;
  return AffineChannel(T, Eigen::Vector3d(0.05, -0.04, 0.10));
}

double manual_log_likelihood(const AffineChannel& ch,
                             const ClickDataset& dataset) {
  double sum = 0.0;
  for (const auto& rec : dataset.records) {
    const BlochVector out = ch.apply(rec.input);
    const double p =
        0.5 * (1.0 + rec.outcome * out(axis_index(rec.axis)));
    sum += std::log(std::max(p, 1e-12));
  }
  return sum;
}

TEST_CASE("standard test states are the six Pauli eigenvectors") {
  const auto states = standard_test_states();
  REQUIRE(states.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(states[i].id == static_cast<int>(i));
    CHECK(std::abs(states[i].r.norm() - 1.0) < 1e-12);
  }
  CHECK((states[0].r + states[1].r).norm() < 1e-15);
  CHECK((states[2].r + states[3].r).norm() < 1e-15);
  CHECK((states[4].r + states[5].r).norm() < 1e-15);
  CHECK((states[0].r - BlochVector::UnitX()).norm() == 0.0);
  CHECK((states[2].r - BlochVector::UnitY()).norm() == 0.0);
  CHECK((states[4].r - BlochVector::UnitZ()).norm() == 0.0);
  CHECK(states[0].label == "x+");
  CHECK(states[5].label == "z-");
}

TEST_CASE("standard plans cover the 18 cells") {
  const MeasurementPlan plan = standard_plan(100);
  REQUIRE(plan.size() == 18);
  long total = 0;
  for (const auto& row : plan) {
    CHECK(row.shots == 100);
    total += row.shots;
  }
  CHECK(total == 1800);

  const MeasurementPlan split = standard_plan_total(1803);
  long split_total = 0;
  for (const auto& row : split) {
    split_total += row.shots;
  }
  CHECK(split_total == 1803);
  CHECK(split[0].shots == 101);
  CHECK(split[1].shots == 101);
  CHECK(split[2].shots == 101);
  CHECK(split[3].shots == 100);
  CHECK(split[17].shots == 100);

  const MeasurementPlan tiny = standard_plan_total(5);
  long tiny_total = 0;
  for (const auto& row : tiny) {
    tiny_total += row.shots;
  }
  CHECK(tiny_total == 5);
}

TEST_CASE("simulate_clicks is exact on deterministic cells") {
  RandomStream rng(601);
  MeasurementPlan plan;
  const auto states = standard_test_states();
  plan.push_back({states[4], PauliAxis::Z, 100});
  const ClickDataset ds = simulate_clicks(
      as_transform(AffineChannel()), plan, rng, "identity");
  REQUIRE(ds.records.size() == 100);
  for (const auto& rec : ds.records) {
    CHECK(rec.outcome == 1);
    CHECK(rec.axis == PauliAxis::Z);
    CHECK((rec.input - BlochVector::UnitZ()).norm() < 1e-15);
  }
  CHECK(ds.meta.source_map == "identity");
  CHECK(ds.meta.n_total == 100);

  RandomStream rng2(602);
  const ClickDataset flipped =
      simulate_clicks(as_transform(unot()), plan, rng2, "unot");
  for (const auto& rec : flipped.records) {
    CHECK(rec.outcome == -1);
  }
}

TEST_CASE("simulate_clicks frequencies follow the Born rule") {
  RandomStream rng(603);
  MeasurementPlan plan;
  plan.push_back({standard_test_states()[0], PauliAxis::X, 100000});
  const ClickDataset ds =
      simulate_clicks(as_transform(average_channel()), plan, rng, "average");
  long plus = 0;
  for (const auto& rec : ds.records) {
    plus += rec.outcome == 1 ? 1 : 0;
  }
  const double frac = static_cast<double>(plus) / 100000.0;
  CHECK(std::abs(frac - 0.5) < 0.005);
}

TEST_CASE("simulate_clicks preserves plan order") {
  RandomStream rng(604);
  const MeasurementPlan plan = standard_plan(3);
  const ClickDataset ds =
      simulate_clicks(as_transform(AffineChannel()), plan, rng, "identity");
  REQUIRE(ds.records.size() == 54);
  std::size_t idx = 0;
  for (const auto& row : plan) {
    for (long s = 0; s < row.shots; ++s, ++idx) {
      CHECK((ds.records[idx].input - row.state.r).norm() < 1e-15);
      CHECK(ds.records[idx].axis == row.axis);
    }
  }
}

TEST_CASE("simulate_clicks validates its inputs") {
  RandomStream rng(605);
  MeasurementPlan plan;
  TestState bad;
  bad.r = BlochVector(0.5, 0.0, 0.0);
  plan.push_back({bad, PauliAxis::Z, 5});
  CHECK_THROWS_AS(
      simulate_clicks(as_transform(AffineChannel()), plan, rng, ""),
      std::invalid_argument);

  MeasurementPlan negative;
  negative.push_back({standard_test_states()[0], PauliAxis::Z, -1});
  CHECK_THROWS_AS(
      simulate_clicks(as_transform(AffineChannel()), negative, rng, ""),
      std::invalid_argument);

  const StateTransform broken = [](const BlochVector&) {
    return BlochVector(std::nan(""), 0.0, 0.0);
  };
  CHECK_THROWS_AS(simulate_clicks(broken, standard_plan(1), rng, ""),
                  std::runtime_error);
}

TEST_CASE("npr dataset protocol") {
  RandomStream rng(606);
  const ClickDataset ds = simulate_npr_dataset(3.0, 500, rng);
  CHECK(ds.records.size() == 500);
  CHECK(ds.meta.n_total == 500);
  CHECK(ds.meta.source_map == "npr:3");
  for (const auto& rec : ds.records) {
    CHECK(std::abs(rec.input.norm() - 1.0) < 1e-10);
  }
  // All three axes should appear in a 500-click draw.
  std::array<long, 3> axis_counts = {0, 0, 0};
  for (const auto& rec : ds.records) {
    axis_counts[static_cast<std::size_t>(axis_index(rec.axis))]++;
  }
  CHECK(axis_counts[0] > 100);
  CHECK(axis_counts[1] > 100);
  CHECK(axis_counts[2] > 100);

  CHECK_THROWS_AS(simulate_npr_dataset(1.0, 0, rng), std::invalid_argument);
}

TEST_CASE("simulation is deterministic per seed") {
  RandomStream a(607);
  RandomStream b(607);
  const ClickDataset da =
      simulate_clicks(as_transform(unot_optimal()), standard_plan(25), a,
                      "unot-optimal");
  const ClickDataset db =
      simulate_clicks(as_transform(unot_optimal()), standard_plan(25), b,
                      "unot-optimal");
  CHECK(dataset_to_jsonl(da) == dataset_to_jsonl(db));

  RandomStream c(608);
  const ClickDataset dc =
      simulate_clicks(as_transform(unot_optimal()), standard_plan(25), c,
                      "unot-optimal");
  CHECK(dataset_to_jsonl(da) != dataset_to_jsonl(dc));

  RandomStream n1(609);
  RandomStream n2(609);
  CHECK(dataset_to_jsonl(simulate_npr_dataset(2.0, 300, n1)) ==
        dataset_to_jsonl(simulate_npr_dataset(2.0, 300, n2)));
}

TEST_CASE("aggregate merges identical records") {
  ClickDataset ds;
  for (int i = 0; i < 100; ++i) {
    ds.records.push_back({BlochVector::UnitZ(), PauliAxis::Z, 1});
  }
  ds.meta.n_total = 100;
  const SufficientStatistics stats = aggregate(ds);
  REQUIRE(stats.cells.size() == 1);
  CHECK(stats.cells[0].count == 100.0);
  CHECK(stats.cells[0].outcome == 1);
  CHECK(stats.total() == 100.0);
}

TEST_CASE("aggregate preserves totals and likelihood") {
  RandomStream rng(610);
  const ClickDataset ds = simulate_npr_dataset(1.0, 2000, rng);
  const SufficientStatistics stats = aggregate(ds);
  CHECK(stats.total() == 2000.0);

  const AffineChannel probe = grid_channel();
  const double from_cells = log_likelihood(probe, stats);
  const double from_records = manual_log_likelihood(probe, ds);
  CHECK(std::abs(from_cells - from_records) < 1e-10);
}

TEST_CASE("exact frequency statistics carry expected counts") {
  const SufficientStatistics stats = exact_frequency_statistics(
      as_transform(unot_optimal()), standard_plan(100));
  CHECK(stats.total() == doctest::Approx(1800.0).epsilon(1e-12));
  double z_plus_count = -1.0;
  for (const auto& cell : stats.cells) {
    if ((cell.input - BlochVector::UnitZ()).norm() < 1e-12 &&
        cell.axis == PauliAxis::Z && cell.outcome == 1) {
      z_plus_count = cell.count;
    }
  }
  // p(+) = (1 - 1/3)/2 = 1/3 on the flipped pole.
  CHECK(z_plus_count == doctest::Approx(100.0 / 3).epsilon(1e-12));
}

TEST_CASE("exact frequency dataset requires integer counts") {
  const ClickDataset ds = exact_frequency_dataset(
      as_transform(grid_channel()), standard_plan(200), "grid");
  CHECK(ds.meta.n_total == 3600);
  CHECK(ds.records.size() == 3600);

  CHECK_THROWS_AS(exact_frequency_dataset(as_transform(unot_optimal()),
                                          standard_plan(100), ""),
                  std::invalid_argument);
}

TEST_CASE("linear inversion is exact on noiseless data") {
  const ClickDataset id_data = exact_frequency_dataset(
      as_transform(AffineChannel()), standard_plan(2), "identity");
  const AffineChannel id_est = linear_inversion(id_data);
  CHECK((id_est.T - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(id_est.t.norm() < 1e-12);

  const AffineChannel gen = grid_channel();
  const ClickDataset gen_data = exact_frequency_dataset(
      as_transform(gen), standard_plan(200), "grid");
  const AffineChannel gen_est = linear_inversion(gen_data);
  CHECK((gen_est.T - gen.T).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((gen_est.t - gen.t).cwiseAbs().maxCoeff() < 1e-12);

  const ClickDataset not_data = exact_frequency_dataset(
      as_transform(unot()), standard_plan(2), "unot");
  const AffineChannel not_est = linear_inversion(not_data);
  CHECK((not_est.T + Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK_FALSE(is_cp(not_est, 1e-9).cp);
}

TEST_CASE("linear inversion reports coverage gaps") {
  RandomStream rng(611);
  MeasurementPlan partial = standard_plan(4);
  partial.pop_back();
  const ClickDataset ds = simulate_clicks(as_transform(AffineChannel()),
                                          partial, rng, "identity");
  CHECK_THROWS_AS(linear_inversion(ds), CoverageError);

  ClickDataset off_grid;
  off_grid.records.push_back(
      {BlochVector(std::sqrt(0.5), std::sqrt(0.5), 0.0), PauliAxis::Z, 1});
  off_grid.meta.n_total = 1;
  CHECK_THROWS_AS(linear_inversion(off_grid), CoverageError);
}

TEST_CASE("linear inversion error shrinks like one over root N") {
  const AffineChannel target = unot_optimal();
  std::vector<double> errs;
  for (long n : {1000L, 4000L, 16000L}) {
    std::vector<double> per_seed;
    for (std::uint64_t seed = 0; seed < 9; ++seed) {
      RandomStream rng(700 + seed);
      const ClickDataset ds =
          simulate_clicks(as_transform(target), standard_plan_total(n), rng,
                          "unot-optimal");
      const AffineChannel est = linear_inversion(ds);
      per_seed.push_back((est.T - target.T).norm());
    }
    std::sort(per_seed.begin(), per_seed.end());
    errs.push_back(per_seed[4]);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  CHECK(errs[2] < 0.6 * errs[0]);
}

TEST_CASE("jsonl round trip is byte exact") {
  RandomStream rng(612);
  ClickDataset ds = simulate_npr_dataset(1.75, 120, rng);
  ds.meta.seed = 612;
  const std::string text = dataset_to_jsonl(ds);
  const ClickDataset back = dataset_from_jsonl(text);
  CHECK(dataset_to_jsonl(back) == text);
  CHECK(back.meta.seed == 612);
  CHECK(back.meta.source_map == ds.meta.source_map);
  CHECK(back.meta.n_total == 120);
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK((back.records[i].input - ds.records[i].input).norm() == 0.0);
    CHECK(back.records[i].axis == ds.records[i].axis);
    CHECK(back.records[i].outcome == ds.records[i].outcome);
  }

  const std::string header = text.substr(0, text.find('\n'));
  CHECK(header.find("\"meta\"") != std::string::npos);
  CHECK(header.find("\"seed\"") != std::string::npos);
  CHECK(header.find("\"source_map\"") != std::string::npos);
  CHECK(header.find("\"n_total\"") != std::string::npos);
}

TEST_CASE("jsonl parsing rejects malformed input") {
  CHECK_THROWS_AS(dataset_from_jsonl(""), IoError);
  CHECK_THROWS_AS(dataset_from_jsonl("{\"meta\":{\"seed\":0,"
                                     "\"source_map\":\"\",\"n_total\":1}}\n"
                                     "not json\n"),
                  IoError);
  CHECK_THROWS_AS(dataset_from_jsonl("{\"meta\":{\"seed\":0,"
                                     "\"source_map\":\"\",\"n_total\":2}}\n"
                                     "{\"rx\":0,\"ry\":0,\"rz\":1,"
                                     "\"axis\":\"z\",\"outcome\":1}\n"),
                  IoError);
}

TEST_CASE("dataset files survive save and load") {
  RandomStream rng(613);
  ClickDataset ds = simulate_npr_dataset(0.4, 50, rng);
  ds.meta.seed = 613;
  const std::string path = "/tmp/qchannel_test_dataset.jsonl";
  save_dataset(ds, path);
  const ClickDataset back = load_dataset(path);
  CHECK(dataset_to_jsonl(back) == dataset_to_jsonl(ds));
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_dataset("/tmp/qchannel_no_such_file.jsonl"), IoError);
}

}  // namespace
