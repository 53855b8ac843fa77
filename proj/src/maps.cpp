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

#include "qchannel/maps.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace qchannel {

namespace {

/// Composite Simpson rule on [0, pi] with n subintervals (n even).
double simpson_0_pi(const std::function<double(double)>& f, int n) {
  const double h = std::numbers::pi / n;
  double sum = f(0.0) + f(std::numbers::pi);
  for (int i = 1; i < n; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
  }
  return sum * h / 3.0;
}

int checked_quad_points(int quad_points) {
  if (quad_points < 16) {
    throw std::invalid_argument("npr quadrature needs at least 16 points");
  }
  return quad_points % 2 == 0 ? quad_points : quad_points + 1;
}

}  // namespace

AffineChannel unot() {
  return AffineChannel(-Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
}

AffineChannel unot_optimal() {
  return AffineChannel(-Eigen::Matrix3d::Identity() / 3.0,
                       Eigen::Vector3d::Zero());
}

AffineChannel average_channel() {
  return AffineChannel(Eigen::Matrix3d::Zero(), Eigen::Vector3d::Zero());
}

BlochVector npr_apply(double theta, const BlochVector& r) {
  if (!r.allFinite() || !std::isfinite(theta)) {
    throw std::invalid_argument("npr_apply: arguments must be finite");
  }
  const double phi = theta * r.z();
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {r.x() * c - r.y() * s, r.x() * s + r.y() * c, r.z()};
}

StateTransform npr_transform(double theta) {
  return [theta](const BlochVector& r) { return npr_apply(theta, r); };
}

AffineChannel npr_approximation(double lambda) {
  Eigen::Matrix3d T = Eigen::Matrix3d::Zero();
  T(0, 0) = lambda;
  T(1, 1) = lambda;
  T(2, 2) = 1.0;
  return AffineChannel(T, Eigen::Vector3d::Zero());
}

double npr_reduced_distance(double theta, double lambda, int quad_points) {
  const int n = checked_quad_points(quad_points);
  // For a pure state at polar angle alpha the two images differ only in the
  // equatorial plane; averaging over the azimuth is exact and leaves
  // sin^2(alpha) sqrt(1 + l^2 - 2 l cos(theta cos alpha)) / 4 to integrate.
  const auto f = [theta, lambda](double alpha) {
    const double z = std::cos(alpha);
    const double s = std::sin(alpha);
    const double g =
        1.0 + lambda * lambda - 2.0 * lambda * std::cos(theta * z);
    return s * s * std::sqrt(std::max(0.0, g));
  };
  return 0.25 * simpson_0_pi(f, n);
}

double npr_reduced_distance_lp(double theta, double lambda, double p,
                               int quad_points) {
  const int n = checked_quad_points(quad_points);
  const auto f = [theta, lambda, p](double alpha) {
    const double z = std::cos(alpha);
    const double s = std::sin(alpha);
    const double g =
        1.0 + lambda * lambda - 2.0 * lambda * std::cos(theta * z);
    const double away = (1.0 - p) * z;
    return s * std::sqrt(std::max(0.0, s * s * g + away * away));
  };
  return 0.25 * simpson_0_pi(f, n);
}

double npr_analytic_lambda(double theta, int quad_points, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("npr_analytic_lambda: tol must be positive");
  }
  const auto d = [theta, quad_points](double lambda) {
    return npr_reduced_distance(theta, lambda, quad_points);
  };

  // Golden-section search; the objective is convex in lambda.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -1.0;
  double b = 1.0;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = d(c);
  double fe = d(e);
  while (b - a > tol) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = d(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = d(e);
    }
  }

  // Snap to an endpoint when it is at least as good, so boundary optima
  // (theta = 0 gives exactly 1) are returned exactly.
  double best = 0.5 * (a + b);
  double fbest = d(best);
  for (double endpoint : {-1.0, 1.0}) {
    const double fend = d(endpoint);
    if (fend <= fbest) {
      best = endpoint;
      fbest = fend;
    }
  }
  return best;
}

}  // namespace qchannel
