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

#include "qchannel/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qchannel {

namespace {

/// Linear extension of the channel to arbitrary 2x2 operators via the Pauli
/// decomposition M = c0 I + sum_a c_a sigma_a with complex coefficients.
Eigen::Matrix2cd apply_to_operator(const AffineChannel& channel,
                                   const Eigen::Matrix2cd& m) {
  const std::complex<double> c0 = 0.5 * m.trace();
  Eigen::Vector3cd c;
  for (auto axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    c(axis_index(axis)) = 0.5 * (pauli_matrix(axis) * m).trace();
  }
  const Eigen::Vector3cd tc = channel.T.cast<std::complex<double>>() * c;
  Eigen::Matrix2cd out = c0 * Eigen::Matrix2cd::Identity();
  for (auto axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    const int a = axis_index(axis);
    out += (c0 * channel.t(a) + tc(a)) * pauli_matrix(axis);
  }
  return out;
}

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

AffineChannel::AffineChannel(const Eigen::Matrix3d& T_,
                             const Eigen::Vector3d& t_)
    : T(T_), t(t_) {
  if (!T.allFinite() || !t.allFinite()) {
    throw std::invalid_argument("AffineChannel: entries must be finite");
  }
}

BlochVector AffineChannel::apply(const BlochVector& r) const {
  return T * r + t;
}

Eigen::Matrix4d AffineChannel::block_matrix() const {
  Eigen::Matrix4d block = Eigen::Matrix4d::Zero();
  block(0, 0) = 1.0;
  block.block<3, 1>(1, 0) = t;
  block.block<3, 3>(1, 1) = T;
  return block;
}

double ChoiMatrix::min_eigenvalue() const {
  const Eigen::Matrix4cd sym = 0.5 * (omega + omega.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(
      sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

ChoiMatrix choi(const AffineChannel& channel) {
  Eigen::Matrix4cd omega = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Eigen::Matrix2cd unit = Eigen::Matrix2cd::Zero();
      unit(i, j) = 1.0;
      omega += 0.5 * kron2(apply_to_operator(channel, unit), unit);
    }
  }
  return ChoiMatrix{omega};
}

CpCheck is_cp(const AffineChannel& channel, double tol) {
  if (!(tol >= 0.0)) {
    throw std::invalid_argument("is_cp: tol must be non-negative");
  }
  const double min_eig = choi(channel).min_eigenvalue();
  return CpCheck{min_eig >= -tol, min_eig};
}

bool unital_tetrahedron_cp(double l1, double l2, double l3) {
  return std::abs(l1 + l2) <= 1.0 + l3 && std::abs(l1 - l2) <= 1.0 - l3;
}

bool unital_positivity(double l1, double l2, double l3) {
  return std::abs(l1) <= 1.0 && std::abs(l2) <= 1.0 && std::abs(l3) <= 1.0;
}

SignedSvd signed_svd(const AffineChannel& channel) {
  const Eigen::Matrix3d& T = channel.T;
  SignedSvd out;

  const bool diagonal = T(0, 1) == 0.0 && T(0, 2) == 0.0 && T(1, 0) == 0.0 &&
                        T(1, 2) == 0.0 && T(2, 0) == 0.0 && T(2, 1) == 0.0;
  if (diagonal && std::abs(T(0, 0)) >= std::abs(T(1, 1)) &&
      std::abs(T(1, 1)) >= std::abs(T(2, 2))) {
    out.lambda = T.diagonal();
    out.tau = channel.t;
    return out;
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      T, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();

  // Push any improper parity into the smallest singular value so both
  // factors become proper rotations.
  const double su = u.determinant() > 0.0 ? 1.0 : -1.0;
  const double sv = v.determinant() > 0.0 ? 1.0 : -1.0;
  u.col(2) *= su;
  v.col(2) *= sv;

  out.left = u;
  out.right = v.transpose();
  out.lambda = svd.singularValues();
  out.lambda(2) *= su * sv;
  out.tau = out.left.transpose() * channel.t;
  return out;
}

AffineChannel regularize_channel(const AffineChannel& channel, double k) {
  if (!(k >= 0.0 && k <= 1.0)) {
    throw std::invalid_argument("regularize_channel: k must lie in [0, 1]");
  }
  return AffineChannel(k * channel.T, k * channel.t);
}

double max_cp_mixing(const AffineChannel& channel, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("max_cp_mixing: tol must be positive");
  }
  // Tight eigenvalue tolerance so that channels sitting exactly on the CP
  // boundary (unitaries, the identity) report their full mixing range.
  constexpr double kEigTol = 1e-12;
  const auto cp_at = [&](double k) {
    return is_cp(regularize_channel(channel, k), kEigTol).cp;
  };

  if (!cp_at(0.0)) {
    throw std::logic_error(
        "max_cp_mixing: the fully mixed endpoint failed the CP check");
  }
  if (cp_at(1.0)) {
    return 1.0;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (cp_at(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

StateTransform as_transform(const AffineChannel& channel) {
  return [channel](const BlochVector& r) { return channel.apply(r); };
}

DistanceEstimate channel_distance(const StateTransform& a,
                                  const StateTransform& b, long n_samples,
                                  RandomStream& rng) {
  if (n_samples < 1) {
    throw std::invalid_argument("channel_distance: n_samples must be positive");
  }
  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const BlochVector r = random_pure_bloch(rng);
    const BlochVector ra = a(r);
    const BlochVector rb = b(r);
    if (!ra.allFinite() || !rb.allFinite()) {
      throw std::runtime_error(
          "channel_distance: a map produced a non-finite Bloch vector");
    }
    const double d = trace_distance(ra, rb);
    const double delta = d - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (d - mean);
  }
  DistanceEstimate out;
  out.mean = mean;
  out.standard_error =
      n_samples > 1 ? std::sqrt(m2 / (static_cast<double>(n_samples) - 1.0) /
                                static_cast<double>(n_samples))
                    : 0.0;
  return out;
}

DistanceEstimate channel_distance(const AffineChannel& a,
                                  const AffineChannel& b, long n_samples,
                                  RandomStream& rng) {
  return channel_distance(as_transform(a), as_transform(b), n_samples, rng);
}

}  // namespace qchannel
