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

#include "qchannel/mml.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qchannel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Vertex {
  std::vector<double> x;
  double f = kNegInf;
};

/// Cells regrouped by measurement axis so one likelihood evaluation is three
/// matrix-vector products instead of a per-cell loop. Matches the reference
/// log_likelihood to rounding.
class GroupedLikelihood {
 public:
  GroupedLikelihood(const SufficientStatistics& stats, double prob_floor)
      : floor_(prob_floor) {
    std::array<std::vector<const StatCell*>, 3> by_axis;
    for (const auto& cell : stats.cells) {
      by_axis[static_cast<std::size_t>(axis_index(cell.axis))].push_back(
          &cell);
    }
    for (std::size_t a = 0; a < 3; ++a) {
      const auto rows = static_cast<Eigen::Index>(by_axis[a].size());
      inputs_[a].resize(rows, 3);
      outcomes_[a].resize(rows);
      counts_[a].resize(rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const StatCell& cell = *by_axis[a][static_cast<std::size_t>(i)];
        inputs_[a].row(i) = cell.input.transpose();
        outcomes_[a](i) = cell.outcome;
        counts_[a](i) = cell.count;
      }
    }
  }

  double operator()(const AffineChannel& channel) const {
    double sum = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      if (inputs_[a].rows() == 0) {
        continue;
      }
      const Eigen::ArrayXd expectation =
          (inputs_[a] * channel.T.row(static_cast<Eigen::Index>(a))
                            .transpose())
              .array() +
          channel.t(static_cast<Eigen::Index>(a));
      const Eigen::ArrayXd p =
          0.5 * (1.0 + outcomes_[a].array() * expectation);
      sum += (counts_[a].array() * p.max(floor_).log()).sum();
    }
    return sum;
  }

 private:
  std::array<Eigen::MatrixX3d, 3> inputs_;
  std::array<Eigen::VectorXd, 3> outcomes_;
  std::array<Eigen::VectorXd, 3> counts_;
  double floor_;
};

/// The Choi matrix is affine in the 12 channel parameters, so feasibility
/// of a candidate reduces to a Cholesky test of a 4x4 Hermitian matrix
/// assembled from precomputed basis blocks. The shift is half the caller's
/// tolerance, which keeps every accepted point strictly inside the set that
/// is_cp accepts at the full tolerance.
class FastFeasibility {
 public:
  explicit FastFeasibility(double cp_tol) : shift_(0.5 * cp_tol) {
    origin_ = choi(AffineChannel(Eigen::Matrix3d::Zero(),
                                 Eigen::Vector3d::Zero()))
                  .omega;
    for (std::size_t j = 0; j < 12; ++j) {
      std::vector<double> unit(12, 0.0);
      unit[j] = 1.0;
      basis_[j] = choi(unpack_channel(unit)).omega - origin_;
    }
  }

  bool operator()(const std::vector<double>& x) const {
    Eigen::Matrix4cd omega = origin_;
    for (std::size_t j = 0; j < 12; ++j) {
      omega.noalias() += x[j] * basis_[j];
    }
    omega.diagonal().array() += shift_;
    return Eigen::LLT<Eigen::Matrix4cd>(omega).info() == Eigen::Success;
  }

 private:
  double shift_;
  Eigen::Matrix4cd origin_;
  std::array<Eigen::Matrix4cd, 12> basis_;
};

}  // namespace

void MlConfig::validate() const {
  if (max_iterations < 1) {
    throw std::invalid_argument("MlConfig: max_iterations must be positive");
  }
  if (!(simplex_scale > 0.0)) {
    throw std::invalid_argument("MlConfig: simplex_scale must be positive");
  }
  if (!(convergence_tol > 0.0)) {
    throw std::invalid_argument("MlConfig: convergence_tol must be positive");
  }
  if (restarts < 1) {
    throw std::invalid_argument("MlConfig: restarts must be positive");
  }
  if (!(cp_tol >= 0.0)) {
    throw std::invalid_argument("MlConfig: cp_tol must be non-negative");
  }
  if (!(prob_floor > 0.0)) {
    throw std::invalid_argument("MlConfig: prob_floor must be positive");
  }
}

double log_likelihood(const AffineChannel& channel,
                      const SufficientStatistics& stats, double prob_floor) {
  if (!(prob_floor > 0.0)) {
    throw std::invalid_argument("log_likelihood: prob_floor must be positive");
  }
  double sum = 0.0;
  for (const auto& cell : stats.cells) {
    const int a = axis_index(cell.axis);
    const double expectation =
        channel.T.row(a).dot(cell.input) + channel.t(a);
    double p = 0.5 * (1.0 + cell.outcome * expectation);
    if (!(p > prob_floor)) {
      p = prob_floor;
    }
    sum += cell.count * std::log(p);
  }
  return sum;
}

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const MlConfig& config) {
  config.validate();
  const std::size_t n = start.size();
  if (n == 0) {
    throw std::invalid_argument("nelder_mead: empty start point");
  }

  const auto eval = [&](const std::vector<double>& x) {
    const double f = objective(x);
    return std::isnan(f) ? kNegInf : f;
  };

  std::vector<Vertex> simplex(n + 1);
  simplex[0].x = start;
  simplex[0].f = eval(start);
  if (simplex[0].f == kNegInf) {
    throw std::invalid_argument("nelder_mead: start point is infeasible");
  }
  // Vertex i+1 offsets coordinate i. Near a boundary corner the offset can
  // be infeasible in both directions, so infeasible vertices are pulled
  // toward the origin on a geometric ladder until they score finite. A
  // simplex born fully feasible stays feasible: accepted trial points must
  // beat a finite vertex, and shrink steps stay inside the convex region.
  for (std::size_t i = 0; i < n; ++i) {
    Vertex& v = simplex[i + 1];
    double pull = 0.0;
    for (int m = 0; m < 16 && !(pull > 1.0); ++m) {
      for (const double sign : {1.0, -1.0}) {
        std::vector<double> candidate = start;
        candidate[i] += sign * config.simplex_scale;
        if (pull > 0.0) {
          for (auto& c : candidate) {
            c *= 1.0 - std::min(pull, 0.9);
          }
        }
        const double f = eval(candidate);
        if (f > kNegInf) {
          v.x = std::move(candidate);
          v.f = f;
          break;
        }
      }
      if (v.f > kNegInf) {
        break;
      }
      pull = pull == 0.0 ? config.simplex_scale : 2.0 * pull;
    }
    if (v.f == kNegInf) {
      v.x = start;
      v.x[i] += config.simplex_scale;
    }
  }

  const auto by_descending_f = [](const Vertex& a, const Vertex& b) {
    return a.f > b.f;
  };

  // Standard reflection 1, expansion 2, contraction 1/2, shrink 1/2, with
  // the infeasible region handled by its -infinity score: reflections that
  // cross the CP boundary lose every comparison and the simplex contracts
  // back inside. A simplex pinned against that boundary can keep one
  // -infinity vertex forever, so spatial collapse is a second stop signal.
  constexpr double kDiameterTol = 1e-10;
  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    std::stable_sort(simplex.begin(), simplex.end(), by_descending_f);
    const double spread = simplex.front().f - simplex.back().f;
    if (spread < config.convergence_tol && std::isfinite(simplex.back().f)) {
      break;
    }
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter,
                            std::abs(simplex[i].x[k] - simplex[0].x[k]));
      }
    }
    if (diameter < kDiameterTol) {
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        centroid[k] += simplex[i].x[k];
      }
    }
    for (auto& c : centroid) {
      c /= static_cast<double>(n);
    }
    Vertex& worst = simplex.back();

    const auto combine = [&](double coeff) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = centroid[k] + coeff * (centroid[k] - worst.x[k]);
      }
      return x;
    };

    Vertex reflected{combine(1.0), 0.0};
    reflected.f = eval(reflected.x);

    if (reflected.f > simplex.front().f) {
      Vertex expanded{combine(2.0), 0.0};
      expanded.f = eval(expanded.x);
      worst = expanded.f > reflected.f ? std::move(expanded)
                                       : std::move(reflected);
      continue;
    }
    if (reflected.f > simplex[n - 1].f) {
      worst = std::move(reflected);
      continue;
    }

    const bool outside = reflected.f > worst.f;
    Vertex contracted{combine(outside ? 0.5 : -0.5), 0.0};
    contracted.f = eval(contracted.x);
    const double keep_above = outside ? reflected.f : worst.f;
    if (contracted.f >= keep_above && contracted.f > kNegInf) {
      worst = std::move(contracted);
      continue;
    }

    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        simplex[i].x[k] =
            simplex[0].x[k] + 0.5 * (simplex[i].x[k] - simplex[0].x[k]);
      }
      simplex[i].f = eval(simplex[i].x);
    }
  }

  std::stable_sort(simplex.begin(), simplex.end(), by_descending_f);
  return NelderMeadResult{simplex.front().x, simplex.front().f, iter};
}

std::vector<double> pack_channel(const AffineChannel& channel) {
  std::vector<double> x(12);
  for (int i = 0; i < 3; ++i) {
    x[static_cast<std::size_t>(i)] = channel.t(i);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      x[static_cast<std::size_t>(3 + 3 * i + j)] = channel.T(i, j);
    }
  }
  return x;
}

AffineChannel unpack_channel(const std::vector<double>& x) {
  if (x.size() != 12) {
    throw std::invalid_argument(
        "unpack_channel: expected 12 parameters, got " +
        std::to_string(x.size()));
  }
  Eigen::Vector3d t;
  Eigen::Matrix3d T;
  for (int i = 0; i < 3; ++i) {
    t(i) = x[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      T(i, j) = x[static_cast<std::size_t>(3 + 3 * i + j)];
    }
  }
  return AffineChannel(T, t);
}

MlResult mml_estimate(const ClickDataset& dataset, const MlConfig& config,
                      RandomStream& rng) {
  config.validate();
  if (dataset.records.empty()) {
    throw std::invalid_argument("mml_estimate: dataset has no clicks");
  }
  const SufficientStatistics stats = aggregate(dataset);
  const GroupedLikelihood likelihood(stats, config.prob_floor);
  const FastFeasibility feasible_point(config.cp_tol);

  const auto objective = [&](const std::vector<double>& x) {
    if (!feasible_point(x)) {
      return kNegInf;
    }
    return likelihood(unpack_channel(x));
  };

  const auto random_feasible_start = [&](RandomStream& stream) {
    constexpr int kMaxAttempts = 10000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      std::vector<double> x(12);
      for (std::size_t i = 0; i < 3; ++i) {
        x[i] = stream.uniform(-0.2, 0.2);
      }
      for (std::size_t i = 3; i < 12; ++i) {
        x[i] = stream.uniform(-1.0, 1.0);
      }
      if (std::isfinite(objective(x))) {
        return x;
      }
    }
    throw std::runtime_error(
        "mml_estimate: failed to sample a feasible starting channel");
  };

  // A single simplex pass tends to degenerate against the CP boundary long
  // before the maximum, so a start is optimized as a sequence of passes:
  // every pass rebuilds a fresh simplex at the incumbent, alternating the
  // full and a reduced edge length, until a pass stops paying.
  const double stall_gain = std::max(1e-7, 10.0 * config.convergence_tol);
  const auto optimize_from = [&](const std::vector<double>& start,
                                 int max_passes, long& iterations) {
    NelderMeadResult incumbent = nelder_mead(objective, start, config);
    iterations += incumbent.iterations;
    MlConfig pass = config;
    int stalls = 0;
    for (int cycle = 0; cycle < max_passes && stalls < 2; ++cycle) {
      pass.simplex_scale = cycle % 2 == 0 ? config.simplex_scale * 0.1
                                          : config.simplex_scale;
      const NelderMeadResult next = nelder_mead(objective, incumbent.x, pass);
      iterations += next.iterations;
      const double gain = next.value - incumbent.value;
      if (next.value > incumbent.value) {
        incumbent = next;
      }
      stalls = gain < stall_gain ? stalls + 1 : 0;
    }
    return incumbent;
  };

  // The log-likelihood is concave and the CP set convex, so every start
  // climbs toward the same maximum. Restart 0 (the deterministic start) gets
  // the deep pass budget; the random restarts are short insurance probes.
  // Budgets depend only on the restart index, so each restart's outcome is
  // fixed by its own sub-stream and the best over restarts can only improve
  // as more are added.
  constexpr int kProbePasses = 6;
  constexpr int kDeepPasses = 60;

  MlResult best;
  best.log_likelihood = kNegInf;
  best.restarts_used = config.restarts;

  NelderMeadResult leader;
  leader.value = kNegInf;
  for (int restart = 0; restart < config.restarts; ++restart) {
    // Restart 0 starts from the completely depolarizing map, which is safely
    // inside the CP set; later restarts start from random feasible channels.
    std::vector<double> start(12, 0.0);
    if (restart > 0) {
      RandomStream stream =
          rng.substream(static_cast<std::uint64_t>(restart));
      start = random_feasible_start(stream);
    }

    const NelderMeadResult outcome = optimize_from(
        start, restart == 0 ? kDeepPasses : kProbePasses,
        best.iterations_used);
    if (outcome.value > leader.value) {
      leader = outcome;
    }
  }

  best.log_likelihood = leader.value;
  best.channel = unpack_channel(leader.x);
  best.feasible = is_cp(best.channel, config.cp_tol).cp;
  return best;
}

double npr_lambda_from_estimate(const AffineChannel& channel) {
  const SignedSvd svd = signed_svd(channel);
  return 0.5 * (svd.lambda(1) + svd.lambda(2));
}

}  // namespace qchannel
