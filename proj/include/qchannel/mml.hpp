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

#include <functional>
#include <vector>

#include "qchannel/tomography.hpp"

namespace qchannel {

struct MlConfig {
  int max_iterations = 20000;
  double simplex_scale = 0.1;
  double convergence_tol = 1e-9;
  int restarts = 5;
  double cp_tol = 1e-9;
  double prob_floor = 1e-12;

  void validate() const;
};

struct MlResult {
  AffineChannel channel;
  double log_likelihood = 0.0;
  long iterations_used = 0;
  int restarts_used = 0;
  bool feasible = false;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

/// Log-likelihood of the aggregated clicks under the channel. Cell
/// probabilities below prob_floor enter as log(prob_floor).
double log_likelihood(const AffineChannel& channel,
                      const SufficientStatistics& stats,
                      double prob_floor = 1e-12);

/// Nelder-Mead simplex MAXIMIZATION. Infeasible points may be signaled by
/// returning -infinity from the objective; the start point must be feasible.
NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const MlConfig& config);

/// Parameter vector layout: (t_x, t_y, t_z) then T in row-major order.
std::vector<double> pack_channel(const AffineChannel& channel);

AffineChannel unpack_channel(const std::vector<double>& x);

/// Maximum-likelihood channel estimate constrained to the CP set. The CP
/// boundary acts through the objective: candidates failing is_cp(., cp_tol)
/// score -infinity. Multi-start over restarts derived substreams of rng.
MlResult mml_estimate(const ClickDataset& dataset, const MlConfig& config,
                      RandomStream& rng);

/// Equatorial shrinkage of an estimated channel: mean of the two smaller
/// signed singular values.
double npr_lambda_from_estimate(const AffineChannel& channel);

}  // namespace qchannel
