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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qchannel/channel.hpp"

namespace qchannel {

/// Thrown when a reconstruction needs measurement cells that the dataset does
/// not cover.
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown on dataset file read/write failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TestState {
  int id = 0;
  BlochVector r = BlochVector::UnitZ();
  std::string label;
};

/// One simulated detector click: which pure state went in, which Pauli axis
/// was measured and which outcome fired.
struct ClickRecord {
  BlochVector input = BlochVector::UnitZ();
  PauliAxis axis = PauliAxis::Z;
  int outcome = 1;
};

struct DatasetMeta {
  std::uint64_t seed = 0;
  std::string source_map;
  long n_total = 0;
};

struct ClickDataset {
  std::vector<ClickRecord> records;
  DatasetMeta meta;
};

/// Aggregated click counts for one (input, axis, outcome) cell. Counts are
/// integers for real datasets; exact-frequency statistics use fractional
/// counts.
struct StatCell {
  BlochVector input = BlochVector::UnitZ();
  PauliAxis axis = PauliAxis::Z;
  int outcome = 1;
  double count = 0.0;
};

struct SufficientStatistics {
  std::vector<StatCell> cells;

  double total() const;
};

struct PlanRow {
  TestState state;
  PauliAxis axis;
  long shots = 0;
};

using MeasurementPlan = std::vector<PlanRow>;

/// The six Pauli eigenstates +-x, +-y, +-z, in that order.
std::vector<TestState> standard_test_states();

/// Full factorial plan: every standard state measured along every axis with
/// the same number of shots (18 cells).
MeasurementPlan standard_plan(long shots_per_cell);

/// Same 18 cells with total_clicks split as evenly as possible, earlier cells
/// taking the remainder.
MeasurementPlan standard_plan_total(long total_clicks);

/// Samples one outcome per shot from the Born probabilities of the mapped
/// states. Records appear in plan order, shot by shot.
ClickDataset simulate_clicks(const StateTransform& map,
                             const MeasurementPlan& plan, RandomStream& rng,
                             const std::string& source_map = "");

/// Nonlinear-rotation protocol: n_states Haar-random pure inputs, one click
/// each along a uniformly random axis.
ClickDataset simulate_npr_dataset(double theta, long n_states,
                                  RandomStream& rng);

SufficientStatistics aggregate(const ClickDataset& dataset);

/// Infinite-statistics limit: expected (fractional) counts per cell instead
/// of sampled ones.
SufficientStatistics exact_frequency_statistics(const StateTransform& map,
                                                const MeasurementPlan& plan);

/// Expected counts materialized as a dataset of individual clicks; fails if
/// some expected count is not an integer.
ClickDataset exact_frequency_dataset(const StateTransform& map,
                                     const MeasurementPlan& plan,
                                     const std::string& source_map = "");

/// Direct least-squares reconstruction from frequencies on the six standard
/// states. Throws CoverageError when a state/axis pair has no clicks or an
/// input is not a standard state.
AffineChannel linear_inversion(const SufficientStatistics& stats);

AffineChannel linear_inversion(const ClickDataset& dataset);

std::string dataset_to_jsonl(const ClickDataset& dataset);

ClickDataset dataset_from_jsonl(const std::string& text);

void save_dataset(const ClickDataset& dataset, const std::string& path);

ClickDataset load_dataset(const std::string& path);

}  // namespace qchannel
