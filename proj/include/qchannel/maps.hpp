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

#include "qchannel/channel.hpp"

namespace qchannel {

/// Universal NOT: r -> -r. Anti-unitary, not CP.
AffineChannel unot();

/// Best CP approximation of the universal NOT: r -> -r / 3.
AffineChannel unot_optimal();

/// Completely depolarizing map: every state goes to the maximally mixed one.
AffineChannel average_channel();

/// Nonlinear polarization rotation: rotate about z by phi = theta * r_z.
/// Nonlinear in the state, so it has no affine form.
BlochVector npr_apply(double theta, const BlochVector& r);

StateTransform npr_transform(double theta);

/// Linear unital family diag(lambda, lambda, 1) used to approximate the
/// nonlinear rotation.
AffineChannel npr_approximation(double lambda);

/// Average trace distance between the nonlinear rotation at strength theta
/// and the approximation diag(lambda, lambda, 1), reduced to a 1-D integral
/// over the polar angle and evaluated with composite Simpson quadrature.
double npr_reduced_distance(double theta, double lambda, int quad_points);

/// Same average distance for the two-parameter family diag(l, l, p) written
/// with l = lambda; p = 1 recovers npr_reduced_distance.
double npr_reduced_distance_lp(double theta, double lambda, double p,
                               int quad_points);

/// Minimizer over lambda in [-1, 1] of npr_reduced_distance at fixed theta,
/// via golden-section search to width tol with an endpoint comparison so the
/// theta = 0 optimum is exactly 1.
double npr_analytic_lambda(double theta, int quad_points, double tol);

}  // namespace qchannel
