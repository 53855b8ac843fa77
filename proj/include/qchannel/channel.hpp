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

#include <Eigen/Dense>

#include "qchannel/bloch.hpp"

namespace qchannel {

/// Trace-preserving hermiticity-preserving qubit map in affine form:
/// r -> T r + t on Bloch vectors. Complete positivity is not part of the
/// invariant, so unphysical maps (universal NOT, raw reconstructions) are
/// first-class values; is_cp() classifies them.
struct AffineChannel {
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  AffineChannel() = default;
  AffineChannel(const Eigen::Matrix3d& T_, const Eigen::Vector3d& t_);

  BlochVector apply(const BlochVector& r) const;

  /// 4x4 block form: row 0 is (1, 0, 0, 0), the rest of column 0 is t and
  /// the lower-right 3x3 block is T.
  Eigen::Matrix4d block_matrix() const;
};

/// Choi operator of a channel, normalized so that a CP trace-preserving map
/// gives a unit-trace positive semidefinite matrix.
struct ChoiMatrix {
  Eigen::Matrix4cd omega;

  double min_eigenvalue() const;
};

struct CpCheck {
  bool cp = false;
  double min_eigenvalue = 0.0;
};

/// Decomposition T = left * diag(lambda) * right with proper rotations and
/// signed singular values ordered by decreasing magnitude. tau is the
/// translation seen in the rotated frame, i.e. the channel factors as a
/// rotation, then r -> diag(lambda) r + tau, then another rotation.
struct SignedSvd {
  Eigen::Matrix3d left = Eigen::Matrix3d::Identity();
  Eigen::Vector3d lambda = Eigen::Vector3d::Ones();
  Eigen::Matrix3d right = Eigen::Matrix3d::Identity();
  Eigen::Vector3d tau = Eigen::Vector3d::Zero();
};

using StateTransform = std::function<BlochVector(const BlochVector&)>;

struct DistanceEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

ChoiMatrix choi(const AffineChannel& channel);

/// CP test via the smallest Choi eigenvalue; cp is true when that eigenvalue
/// is at least -tol.
CpCheck is_cp(const AffineChannel& channel, double tol);

/// CP condition for the unital diagonal family r -> diag(l1, l2, l3) r:
/// the four facet inequalities of the tetrahedron with corners (1,1,1),
/// (1,-1,-1), (-1,1,-1) and (-1,-1,1).
bool unital_tetrahedron_cp(double l1, double l2, double l3);

/// Positivity (not complete positivity) for the same family: the unit cube.
bool unital_positivity(double l1, double l2, double l3);

SignedSvd signed_svd(const AffineChannel& channel);

/// Mixes the channel with the completely depolarizing map:
/// r -> k (T r + t).
AffineChannel regularize_channel(const AffineChannel& channel, double k);

/// Largest k in [0, 1] for which regularize_channel(channel, k) is CP,
/// located by bisection to absolute precision tol. The returned value is the
/// feasible lower end of the final bracket, so regularizing by it is CP.
double max_cp_mixing(const AffineChannel& channel, double tol);

StateTransform as_transform(const AffineChannel& channel);

/// Monte Carlo average trace distance between the images of Haar-uniform
/// pure states under the two maps, with the standard error of the mean.
DistanceEstimate channel_distance(const StateTransform& a,
                                  const StateTransform& b, long n_samples,
                                  RandomStream& rng);

DistanceEstimate channel_distance(const AffineChannel& a,
                                  const AffineChannel& b, long n_samples,
                                  RandomStream& rng);

}  // namespace qchannel
