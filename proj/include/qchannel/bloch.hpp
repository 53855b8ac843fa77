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

#include <string>

#include <Eigen/Dense>

#include "qchannel/random.hpp"

namespace qchannel {

/// Bloch vector of a qubit state: rho = (I + r . sigma) / 2.
using BlochVector = Eigen::Vector3d;

enum class PauliAxis { X = 0, Y = 1, Z = 2 };

constexpr int axis_index(PauliAxis axis) { return static_cast<int>(axis); }

const char* axis_name(PauliAxis axis);

/// Parses "x", "y" or "z"; throws std::invalid_argument otherwise.
PauliAxis axis_from_name(const std::string& name);

const Eigen::Matrix2cd& pauli_matrix(PauliAxis axis);

/// Two-outcome Pauli measurement effect (I + sign * sigma_axis) / 2.
struct Effect {
  PauliAxis axis;
  int sign;

  Effect(PauliAxis axis_, int sign_);

  Eigen::Matrix2cd projector() const;
};

/// Hermitian unit-trace 2x2 operator. Positivity is deliberately not part of
/// the class invariant so that outputs of unphysical maps stay representable;
/// min_eigenvalue() reports how far an instance is from a physical state.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Eigen::Matrix2cd& m);

  const Eigen::Matrix2cd& matrix() const { return m_; }

  double min_eigenvalue() const;

 private:
  Eigen::Matrix2cd m_;
};

DensityMatrix bloch_to_density(const BlochVector& r);

BlochVector density_to_bloch(const DensityMatrix& rho);

/// Born probability of the outcome described by the effect, clamped to [0, 1].
double outcome_probability(const BlochVector& r, const Effect& effect);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Same metric evaluated directly on Bloch vectors: |r1 - r2| / 2.
double trace_distance(const BlochVector& r1, const BlochVector& r2);

/// Shrinks the Bloch vector towards the maximally mixed state by factor k.
BlochVector regularize_state(const BlochVector& r, double k);

/// Haar-uniform point on the Bloch sphere (uniform z, uniform azimuth).
BlochVector random_pure_bloch(RandomStream& rng);

}  // namespace qchannel
