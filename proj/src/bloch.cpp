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

#include "qchannel/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qchannel {

namespace {

constexpr double kStructureTol = 1e-12;

}  // namespace

const char* axis_name(PauliAxis axis) {
  switch (axis) {
    case PauliAxis::X:
      return "x";
    case PauliAxis::Y:
      return "y";
    case PauliAxis::Z:
      return "z";
  }
  throw std::invalid_argument("axis_name: invalid axis");
}

PauliAxis axis_from_name(const std::string& name) {
  if (name == "x") return PauliAxis::X;
  if (name == "y") return PauliAxis::Y;
  if (name == "z") return PauliAxis::Z;
  throw std::invalid_argument("axis_from_name: expected x, y or z, got \"" +
                              name + "\"");
}

const Eigen::Matrix2cd& pauli_matrix(PauliAxis axis) {
  using namespace std::complex_literals;
  static const Eigen::Matrix2cd sigma_x =
      (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  static const Eigen::Matrix2cd sigma_y =
      (Eigen::Matrix2cd() << 0, -1i, 1i, 0).finished();
  static const Eigen::Matrix2cd sigma_z =
      (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  switch (axis) {
    case PauliAxis::X:
      return sigma_x;
    case PauliAxis::Y:
      return sigma_y;
    case PauliAxis::Z:
      return sigma_z;
  }
  throw std::invalid_argument("pauli_matrix: invalid axis");
}

Effect::Effect(PauliAxis axis_, int sign_) : axis(axis_), sign(sign_) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("Effect: sign must be +1 or -1");
  }
}

Eigen::Matrix2cd Effect::projector() const {
  return 0.5 * (Eigen::Matrix2cd::Identity() +
                static_cast<double>(sign) * pauli_matrix(axis));
}

DensityMatrix::DensityMatrix(const Eigen::Matrix2cd& m) : m_(m) {
  if (!m.allFinite()) {
    throw std::invalid_argument("DensityMatrix: entries must be finite");
  }
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kStructureTol) {
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  }
  if (std::abs(m.trace() - std::complex<double>(1.0, 0.0)) > kStructureTol) {
    throw std::invalid_argument("DensityMatrix: trace must be 1");
  }
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(
      m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix bloch_to_density(const BlochVector& r) {
  if (!r.allFinite()) {
    throw std::invalid_argument("bloch_to_density: vector must be finite");
  }
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  for (auto axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    m += r(axis_index(axis)) * pauli_matrix(axis);
  }
  return DensityMatrix(0.5 * m);
}

BlochVector density_to_bloch(const DensityMatrix& rho) {
  BlochVector r;
  for (auto axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    r(axis_index(axis)) = (pauli_matrix(axis) * rho.matrix()).trace().real();
  }
  return r;
}

double outcome_probability(const BlochVector& r, const Effect& effect) {
  const double p = 0.5 * (1.0 + effect.sign * r(axis_index(effect.axis)));
  return std::clamp(p, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(
      a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const BlochVector& r1, const BlochVector& r2) {
  return 0.5 * (r1 - r2).norm();
}

BlochVector regularize_state(const BlochVector& r, double k) {
  if (!(k >= 0.0 && k <= 1.0)) {
    throw std::invalid_argument("regularize_state: k must lie in [0, 1]");
  }
  return k * r;
}

BlochVector random_pure_bloch(RandomStream& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

}  // namespace qchannel
