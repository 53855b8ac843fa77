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

#include "qchannel/tomography.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "qchannel/maps.hpp"

namespace qchannel {

namespace {

constexpr double kUnitNormTol = 1e-10;

void check_record_input(const BlochVector& r) {
  if (!r.allFinite() || std::abs(r.norm() - 1.0) > kUnitNormTol) {
    throw std::invalid_argument(
        "click record inputs must be unit Bloch vectors");
  }
}

void check_plan(const MeasurementPlan& plan) {
  for (const auto& row : plan) {
    check_record_input(row.state.r);
    if (row.shots < 0) {
      throw std::invalid_argument("measurement plan shots must be >= 0");
    }
  }
}

BlochVector checked_map_output(const StateTransform& map,
                               const BlochVector& r) {
  const BlochVector out = map(r);
  if (!out.allFinite()) {
    throw std::runtime_error("map produced a non-finite Bloch vector");
  }
  return out;
}

double raw_plus_probability(const BlochVector& mapped, PauliAxis axis) {
  return 0.5 * (1.0 + mapped(axis_index(axis)));
}

std::string format_g17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace

double SufficientStatistics::total() const {
  double sum = 0.0;
  for (const auto& cell : cells) {
    sum += cell.count;
  }
  return sum;
}

std::vector<TestState> standard_test_states() {
  return {
      {0, {1.0, 0.0, 0.0}, "x+"},  {1, {-1.0, 0.0, 0.0}, "x-"},
      {2, {0.0, 1.0, 0.0}, "y+"},  {3, {0.0, -1.0, 0.0}, "y-"},
      {4, {0.0, 0.0, 1.0}, "z+"},  {5, {0.0, 0.0, -1.0}, "z-"},
  };
}

MeasurementPlan standard_plan(long shots_per_cell) {
  if (shots_per_cell < 0) {
    throw std::invalid_argument("standard_plan: shots_per_cell must be >= 0");
  }
  MeasurementPlan plan;
  for (const auto& state : standard_test_states()) {
    for (auto axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
      plan.push_back({state, axis, shots_per_cell});
    }
  }
  return plan;
}

MeasurementPlan standard_plan_total(long total_clicks) {
  if (total_clicks < 0) {
    throw std::invalid_argument(
        "standard_plan_total: total_clicks must be >= 0");
  }
  MeasurementPlan plan = standard_plan(total_clicks / 18);
  const long remainder = total_clicks % 18;
  for (long i = 0; i < remainder; ++i) {
    plan[static_cast<std::size_t>(i)].shots += 1;
  }
  return plan;
}

ClickDataset simulate_clicks(const StateTransform& map,
                             const MeasurementPlan& plan, RandomStream& rng,
                             const std::string& source_map) {
  check_plan(plan);
  ClickDataset dataset;
  dataset.meta.seed = rng.seed();
  dataset.meta.source_map = source_map;
  for (const auto& row : plan) {
    const BlochVector mapped = checked_map_output(map, row.state.r);
    const double p_plus =
        outcome_probability(mapped, Effect(row.axis, 1));
    for (long shot = 0; shot < row.shots; ++shot) {
      const int outcome = rng.bernoulli(p_plus) ? 1 : -1;
      dataset.records.push_back({row.state.r, row.axis, outcome});
    }
  }
  dataset.meta.n_total = static_cast<long>(dataset.records.size());
  return dataset;
}

ClickDataset simulate_npr_dataset(double theta, long n_states,
                                  RandomStream& rng) {
  if (n_states < 1) {
    throw std::invalid_argument(
        "simulate_npr_dataset: n_states must be positive");
  }
  ClickDataset dataset;
  dataset.meta.seed = rng.seed();
  dataset.meta.source_map = "npr:" + format_g17(theta);
  dataset.records.reserve(static_cast<std::size_t>(n_states));
  for (long i = 0; i < n_states; ++i) {
    const BlochVector r = random_pure_bloch(rng);
    const BlochVector mapped = npr_apply(theta, r);
    const auto axis = static_cast<PauliAxis>(rng.uniform_index(3));
    const double p_plus = outcome_probability(mapped, Effect(axis, 1));
    const int outcome = rng.bernoulli(p_plus) ? 1 : -1;
    dataset.records.push_back({r, axis, outcome});
  }
  dataset.meta.n_total = n_states;
  return dataset;
}

SufficientStatistics aggregate(const ClickDataset& dataset) {
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, int, int>;
  std::map<Key, double> counts;
  for (const auto& record : dataset.records) {
    check_record_input(record.input);
    if (record.outcome != 1 && record.outcome != -1) {
      throw std::invalid_argument("click outcomes must be +1 or -1");
    }
    const Key key{std::bit_cast<std::uint64_t>(record.input.x()),
                  std::bit_cast<std::uint64_t>(record.input.y()),
                  std::bit_cast<std::uint64_t>(record.input.z()),
                  axis_index(record.axis), record.outcome};
    counts[key] += 1.0;
  }
  SufficientStatistics stats;
  stats.cells.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    StatCell cell;
    cell.input = {std::bit_cast<double>(std::get<0>(key)),
                  std::bit_cast<double>(std::get<1>(key)),
                  std::bit_cast<double>(std::get<2>(key))};
    cell.axis = static_cast<PauliAxis>(std::get<3>(key));
    cell.outcome = std::get<4>(key);
    cell.count = count;
    stats.cells.push_back(cell);
  }
  return stats;
}

SufficientStatistics exact_frequency_statistics(const StateTransform& map,
                                                const MeasurementPlan& plan) {
  check_plan(plan);
  SufficientStatistics stats;
  for (const auto& row : plan) {
    if (row.shots == 0) {
      continue;
    }
    const BlochVector mapped = checked_map_output(map, row.state.r);
    const double p_plus = raw_plus_probability(mapped, row.axis);
    const double shots = static_cast<double>(row.shots);
    stats.cells.push_back({row.state.r, row.axis, 1, shots * p_plus});
    stats.cells.push_back({row.state.r, row.axis, -1, shots * (1.0 - p_plus)});
  }
  return stats;
}

ClickDataset exact_frequency_dataset(const StateTransform& map,
                                     const MeasurementPlan& plan,
                                     const std::string& source_map) {
  check_plan(plan);
  constexpr double kIntegerTol = 1e-9;
  ClickDataset dataset;
  dataset.meta.seed = 0;
  dataset.meta.source_map = source_map;
  for (const auto& row : plan) {
    if (row.shots == 0) {
      continue;
    }
    const BlochVector mapped = checked_map_output(map, row.state.r);
    const double p_plus = raw_plus_probability(mapped, row.axis);
    if (p_plus < -kIntegerTol || p_plus > 1.0 + kIntegerTol) {
      throw std::invalid_argument(
          "exact_frequency_dataset: outcome probability outside [0, 1]");
    }
    const double expected = static_cast<double>(row.shots) *
                            std::clamp(p_plus, 0.0, 1.0);
    const double rounded = std::round(expected);
    if (std::abs(expected - rounded) > kIntegerTol) {
      throw std::invalid_argument(
          "exact_frequency_dataset: expected count " + format_g17(expected) +
          " is not an integer; choose shots that make frequencies exact");
    }
    const long n_plus = static_cast<long>(rounded);
    for (long i = 0; i < row.shots; ++i) {
      dataset.records.push_back(
          {row.state.r, row.axis, i < n_plus ? 1 : -1});
    }
  }
  dataset.meta.n_total = static_cast<long>(dataset.records.size());
  return dataset;
}

AffineChannel linear_inversion(const SufficientStatistics& stats) {
  const auto states = standard_test_states();
  constexpr double kMatchTol = 1e-9;

  // counts[state][axis][outcome 0:+1, 1:-1]
  std::array<std::array<std::array<double, 2>, 3>, 6> counts{};
  for (const auto& cell : stats.cells) {
    int match = -1;
    for (const auto& state : states) {
      if ((cell.input - state.r).norm() <= kMatchTol) {
        match = state.id;
        break;
      }
    }
    if (match < 0) {
      throw CoverageError(
          "linear_inversion: dataset contains an input that is not one of "
          "the six standard test states");
    }
    if (cell.count < 0.0) {
      throw std::invalid_argument("linear_inversion: negative cell count");
    }
    counts[static_cast<std::size_t>(match)][static_cast<std::size_t>(
        axis_index(cell.axis))][cell.outcome == 1 ? 0 : 1] += cell.count;
  }

  // Mean Pauli values of each mapped state, then one least-squares solve for
  // the affine parameters: [r_j^T 1] w_a = <sigma_a>_j.
  Eigen::Matrix<double, 6, 4> design;
  Eigen::Matrix<double, 6, 3> response;
  for (const auto& state : states) {
    const auto j = static_cast<std::size_t>(state.id);
    design.row(state.id) << state.r.x(), state.r.y(), state.r.z(), 1.0;
    for (std::size_t a = 0; a < 3; ++a) {
      const double plus = counts[j][a][0];
      const double minus = counts[j][a][1];
      const double shots = plus + minus;
      if (shots <= 0.0) {
        throw CoverageError("linear_inversion: no clicks for state " +
                            state.label + " along axis " +
                            axis_name(static_cast<PauliAxis>(a)));
      }
      response(state.id, static_cast<int>(a)) = (plus - minus) / shots;
    }
  }

  const Eigen::Matrix<double, 4, 3> w =
      design.colPivHouseholderQr().solve(response);
  const Eigen::Matrix3d T = w.topRows<3>().transpose();
  const Eigen::Vector3d t = w.row(3).transpose();
  return AffineChannel(T, t);
}

AffineChannel linear_inversion(const ClickDataset& dataset) {
  return linear_inversion(aggregate(dataset));
}

std::string dataset_to_jsonl(const ClickDataset& dataset) {
  nlohmann::ordered_json meta;
  meta["meta"]["seed"] = dataset.meta.seed;
  meta["meta"]["source_map"] = dataset.meta.source_map;
  meta["meta"]["n_total"] = dataset.meta.n_total;

  std::string out = meta.dump();
  out.push_back('\n');
  char buf[256];
  for (const auto& record : dataset.records) {
    check_record_input(record.input);
    std::snprintf(buf, sizeof buf,
                  "{\"rx\":%.17g,\"ry\":%.17g,\"rz\":%.17g,\"axis\":\"%s\","
                  "\"outcome\":%d}\n",
                  record.input.x(), record.input.y(), record.input.z(),
                  axis_name(record.axis), record.outcome);
    out += buf;
  }
  return out;
}

ClickDataset dataset_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ClickDataset dataset;
  bool have_meta = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& err) {
      throw IoError("dataset line " + std::to_string(line_no) + ": " +
                    err.what());
    }
    try {
      if (!have_meta) {
        const auto& meta = j.at("meta");
        dataset.meta.seed = meta.at("seed").get<std::uint64_t>();
        dataset.meta.source_map = meta.at("source_map").get<std::string>();
        dataset.meta.n_total = meta.at("n_total").get<long>();
        have_meta = true;
        continue;
      }
      ClickRecord record;
      record.input = {j.at("rx").get<double>(), j.at("ry").get<double>(),
                      j.at("rz").get<double>()};
      record.axis = axis_from_name(j.at("axis").get<std::string>());
      record.outcome = j.at("outcome").get<int>();
      if (record.outcome != 1 && record.outcome != -1) {
        throw std::invalid_argument("outcome must be +1 or -1");
      }
      check_record_input(record.input);
      dataset.records.push_back(record);
    } catch (const nlohmann::json::exception& err) {
      throw IoError("dataset line " + std::to_string(line_no) + ": " +
                    err.what());
    } catch (const std::invalid_argument& err) {
      throw IoError("dataset line " + std::to_string(line_no) + ": " +
                    err.what());
    }
  }
  if (!have_meta) {
    throw IoError("dataset is missing the metadata header line");
  }
  if (dataset.meta.n_total != static_cast<long>(dataset.records.size())) {
    throw IoError("dataset metadata announces " +
                  std::to_string(dataset.meta.n_total) + " records but " +
                  std::to_string(dataset.records.size()) + " were found");
  }
  return dataset;
}

void save_dataset(const ClickDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  const std::string text = dataset_to_jsonl(dataset);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw IoError("failed while writing " + path);
  }
}

ClickDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path + " for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("failed while reading " + path);
  }
  return dataset_from_jsonl(buffer.str());
}

}  // namespace qchannel
