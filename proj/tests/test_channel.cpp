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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "qchannel/channel.hpp"
#include "qchannel/maps.hpp"
#include "qchannel/random.hpp"

namespace {

using namespace qchannel;

AffineChannel diag_channel(double l1, double l2, double l3) {
  Eigen::Vector3d d;
  d << l1, l2, l3;
  return AffineChannel(d.asDiagonal(), Eigen::Vector3d::Zero());
}

AffineChannel random_channel(RandomStream& rng, double t_range = 0.2,
                             double entry_range = 2.0) {
  Eigen::Matrix3d T;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      T(i, j) = rng.uniform(-entry_range, entry_range);
    }
  }
  Eigen::Vector3d t;
  for (int i = 0; i < 3; ++i) {
    t(i) = rng.uniform(-t_range, t_range);
  }
  return AffineChannel(T, t);
}

// Closed-form mixing bound for unital diagonal channels: scaling by k keeps
// the map inside the tetrahedron while k * u <= 1 for each facet direction u.
double diag_max_mixing_oracle(double l1, double l2, double l3) {
  const std::array<double, 4> facets = {l1 + l2 - l3, -l1 - l2 - l3,
                                        l1 - l2 + l3, -l1 + l2 + l3};
  double k = 1.0;
  for (double u : facets) {
    if (u > 0.0) {
      k = std::min(k, 1.0 / u);
    }
  }
  return k;
}

TEST_CASE("affine channel applies T r + t") {
  const AffineChannel identity;
  const BlochVector r(0.3, -0.4, 0.8);
  CHECK((identity.apply(r) - r).norm() == doctest::Approx(0.0).epsilon(1e-15));

  CHECK((unot().apply(r) + r).norm() == doctest::Approx(0.0).epsilon(1e-15));

  const BlochVector pole(0.0, 0.0, 1.0);
  const BlochVector flipped = diag_channel(-1.0 / 3, -1.0 / 3, -1.0 / 3)
                                  .apply(pole);
  CHECK(flipped(0) == doctest::Approx(0.0));
  CHECK(flipped(1) == doctest::Approx(0.0));
  CHECK(flipped(2) == doctest::Approx(-1.0 / 3).epsilon(1e-14));

  Eigen::Matrix3d T;
  T << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9;
  const Eigen::Vector3d t(0.01, -0.02, 0.03);
  const AffineChannel generic(T, t);
  CHECK((generic.apply(r) - (T * r + t)).norm() < 1e-15);
}

TEST_CASE("affine channel rejects non-finite entries") {
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  T(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(AffineChannel(T, Eigen::Vector3d::Zero()),
                  std::invalid_argument);
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  t(0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(AffineChannel(Eigen::Matrix3d::Identity(), t),
                  std::invalid_argument);
}

TEST_CASE("block matrix layout") {
  CHECK(AffineChannel().block_matrix().isApprox(
      Eigen::Vector4d(1, 1, 1, 1).asDiagonal().toDenseMatrix()));
  CHECK(unot().block_matrix().isApprox(
      Eigen::Vector4d(1, -1, -1, -1).asDiagonal().toDenseMatrix()));
  CHECK(average_channel().block_matrix().isApprox(
      Eigen::Vector4d(1, 0, 0, 0).asDiagonal().toDenseMatrix()));

  Eigen::Matrix3d T;
  T << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const Eigen::Vector3d t(10, 11, 12);
  const Eigen::Matrix4d block = AffineChannel(T, t).block_matrix();
  CHECK(block(0, 0) == 1.0);
  CHECK(block(0, 1) == 0.0);
  CHECK(block(0, 2) == 0.0);
  CHECK(block(0, 3) == 0.0);
  CHECK(block(1, 0) == 10.0);
  CHECK(block(2, 0) == 11.0);
  CHECK(block(3, 0) == 12.0);
  CHECK(block.block<3, 3>(1, 1).isApprox(T));
}

TEST_CASE("choi matrices of the named maps") {
  // Identity channel: the Choi state is the maximally entangled projector.
  Eigen::Matrix4cd bell = Eigen::Matrix4cd::Zero();
  bell(0, 0) = 0.5;
  bell(0, 3) = 0.5;
  bell(3, 0) = 0.5;
  bell(3, 3) = 0.5;
  CHECK((choi(AffineChannel()).omega - bell).cwiseAbs().maxCoeff() < 1e-14);

  CHECK((choi(average_channel()).omega -
         0.25 * Eigen::Matrix4cd::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(choi(unot()).omega);
  const Eigen::Vector4d eigs = solver.eigenvalues();
  CHECK(eigs(0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(eigs(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eigs(2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eigs(3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("choi is hermitian with unit trace on random channels") {
  RandomStream rng(401);
  for (int trial = 0; trial < 200; ++trial) {
    const AffineChannel ch = random_channel(rng, 0.5, 2.0);
    const Eigen::Matrix4cd omega = choi(ch).omega;
    CHECK((omega - omega.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(omega.trace().real() - 1.0) < 1e-12);
    CHECK(std::abs(omega.trace().imag()) < 1e-12);
  }
}

TEST_CASE("choi eigenvalues of diagonal unital channels match the Pauli "
          "channel form") {
  // For T = diag(l1, l2, l3), t = 0 the Choi eigenvalues are the four Pauli
  // weights (1 + s1 l1 + s2 l2 + s3 l3)/4 with signs s such that s1 s2 s3 = 1.
  RandomStream rng(402);
  for (int trial = 0; trial < 200; ++trial) {
    const double l1 = rng.uniform(-1.5, 1.5);
    const double l2 = rng.uniform(-1.5, 1.5);
    const double l3 = rng.uniform(-1.5, 1.5);
    std::array<double, 4> expected = {
        0.25 * (1.0 + l1 + l2 + l3), 0.25 * (1.0 + l1 - l2 - l3),
        0.25 * (1.0 - l1 + l2 - l3), 0.25 * (1.0 - l1 - l2 + l3)};
    std::sort(expected.begin(), expected.end());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(
        choi(diag_channel(l1, l2, l3)).omega);
    for (int i = 0; i < 4; ++i) {
      CHECK(solver.eigenvalues()(i) ==
            doctest::Approx(expected[static_cast<std::size_t>(i)])
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("is_cp classifies the named maps") {
  const CpCheck id_check = is_cp(AffineChannel(), 1e-9);
  CHECK(id_check.cp);
  CHECK(std::abs(id_check.min_eigenvalue) < 1e-12);

  const CpCheck not_check = is_cp(unot(), 1e-9);
  CHECK_FALSE(not_check.cp);
  CHECK(not_check.min_eigenvalue == doctest::Approx(-0.5).epsilon(1e-12));

  const CpCheck opt_check = is_cp(unot_optimal(), 1e-9);
  CHECK(opt_check.cp);
  CHECK(std::abs(opt_check.min_eigenvalue) < 1e-12);

  CHECK_THROWS_AS(is_cp(AffineChannel(), -1.0), std::invalid_argument);
}

TEST_CASE("tetrahedron criterion examples") {
  CHECK(unital_tetrahedron_cp(1, 1, 1));
  CHECK_FALSE(unital_tetrahedron_cp(-1, -1, -1));
  CHECK(unital_tetrahedron_cp(-1.0 / 3, -1.0 / 3, -1.0 / 3));
  CHECK(unital_tetrahedron_cp(0, 0, 0));
  CHECK(unital_tetrahedron_cp(1, -1, -1));
  CHECK(unital_tetrahedron_cp(-1, -1, 1));
  CHECK_FALSE(unital_tetrahedron_cp(1.01, 1, 1));
}

TEST_CASE("tetrahedron criterion agrees with the Choi test") {
  RandomStream rng(403);
  for (int trial = 0; trial < 2000; ++trial) {
    const double l1 = rng.uniform(-1.5, 1.5);
    const double l2 = rng.uniform(-1.5, 1.5);
    const double l3 = rng.uniform(-1.5, 1.5);
    CHECK(unital_tetrahedron_cp(l1, l2, l3) ==
          is_cp(diag_channel(l1, l2, l3), 1e-9).cp);
  }
}

TEST_CASE("unital positivity is the unit cube") {
  CHECK(unital_positivity(-1, -1, -1));
  CHECK_FALSE(unital_positivity(1.2, 0, 0));
  CHECK(unital_positivity(0, 0, 0));
  CHECK(unital_positivity(1, -1, 1));
  CHECK_FALSE(unital_positivity(0, -1.0001, 0));
}

TEST_CASE("signed svd keeps exact diagonals") {
  const SignedSvd svd = signed_svd(unot_optimal());
  CHECK(svd.left.isIdentity(1e-14));
  CHECK(svd.right.isIdentity(1e-14));
  CHECK(svd.lambda(0) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  CHECK(svd.lambda(1) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  CHECK(svd.lambda(2) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  CHECK(svd.tau.norm() < 1e-14);
}

TEST_CASE("signed svd of a rotation has unit factors") {
  Eigen::Matrix3d rot;
  rot << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const SignedSvd svd = signed_svd(AffineChannel(rot, Eigen::Vector3d::Zero()));
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(std::abs(svd.lambda(i)) - 1.0) < 1e-12);
  }
  CHECK(std::abs(svd.left.determinant() - 1.0) < 1e-10);
  CHECK(std::abs(svd.right.determinant() - 1.0) < 1e-10);
  CHECK((svd.left * svd.lambda.asDiagonal() * svd.right - rot)
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("signed svd reconstructs random channels") {
  RandomStream rng(404);
  std::vector<AffineChannel> cases;
  for (int trial = 0; trial < 100; ++trial) {
    cases.push_back(random_channel(rng, 0.4, 1.5));
  }
  // Reflection and rank-deficient corners.
  cases.push_back(diag_channel(1.0, 1.0, -1.0));
  cases.push_back(diag_channel(0.5, 0.3, 0.0));
  cases.push_back(diag_channel(0.0, 0.0, 0.0));
  Eigen::Matrix3d reflect_mix;
  reflect_mix << 0, 1, 0, 1, 0, 0, 0, 0, -1;
  cases.push_back(AffineChannel(reflect_mix, Eigen::Vector3d(0.1, 0.0, -0.2)));

  for (const AffineChannel& ch : cases) {
    const SignedSvd svd = signed_svd(ch);
    CHECK((svd.left * svd.lambda.asDiagonal() * svd.right - ch.T)
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK(std::abs(svd.left.determinant() - 1.0) < 1e-10);
    CHECK(std::abs(svd.right.determinant() - 1.0) < 1e-10);
    CHECK(std::abs(svd.lambda(0)) + 1e-12 >= std::abs(svd.lambda(1)));
    CHECK(std::abs(svd.lambda(1)) + 1e-12 >= std::abs(svd.lambda(2)));
    // tau is the translation seen between the two rotations.
    RandomStream probe(405);
    for (int k = 0; k < 5; ++k) {
      const BlochVector r = random_pure_bloch(probe);
      const BlochVector direct = ch.apply(r);
      const BlochVector factored =
          svd.left *
          (svd.lambda.asDiagonal() * (svd.right * r).eval() + svd.tau);
      CHECK((direct - factored).norm() < 1e-10);
    }
  }
}

TEST_CASE("regularize channel scales toward the average map") {
  const AffineChannel mixed = regularize_channel(unot(), 1.0 / 3);
  CHECK((mixed.T - unot_optimal().T).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(mixed.t.norm() < 1e-15);

  RandomStream rng(406);
  const AffineChannel ch = random_channel(rng);
  const AffineChannel zero = regularize_channel(ch, 0.0);
  CHECK(zero.T.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.t.norm() == 0.0);
  const AffineChannel full = regularize_channel(ch, 1.0);
  CHECK((full.T - ch.T).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(regularize_channel(ch, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(regularize_channel(ch, 1.1), std::invalid_argument);
}

TEST_CASE("max cp mixing on the named maps") {
  CHECK(max_cp_mixing(unot(), 1e-9) == doctest::Approx(1.0 / 3).epsilon(1e-6));
  CHECK(max_cp_mixing(AffineChannel(), 1e-9) == doctest::Approx(1.0));
  CHECK(max_cp_mixing(unot_optimal(), 1e-9) == doctest::Approx(1.0));
  // Two-axis flip is a proper rotation about x, already CP at full strength.
  CHECK(max_cp_mixing(diag_channel(-1, -1, 1), 1e-9) == doctest::Approx(1.0));
  // Dephasing the flip's z-axis moves the boundary to 1/2.
  CHECK(max_cp_mixing(diag_channel(-1, -1, 0), 1e-9) ==
        doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("max cp mixing matches the tetrahedron closed form") {
  RandomStream rng(407);
  for (int trial = 0; trial < 100; ++trial) {
    const double l1 = rng.uniform(-1.0, 1.0);
    const double l2 = rng.uniform(-1.0, 1.0);
    const double l3 = rng.uniform(-1.0, 1.0);
    const double expected = diag_max_mixing_oracle(l1, l2, l3);
    CHECK(max_cp_mixing(diag_channel(l1, l2, l3), 1e-9) ==
          doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("max cp mixing brackets the boundary") {
  for (const AffineChannel& ch :
       {unot(), diag_channel(-1, -1, 0), diag_channel(-0.9, 0.8, -0.7)}) {
    const double k = max_cp_mixing(ch, 1e-9);
    CHECK(is_cp(regularize_channel(ch, k), 1e-8).cp);
    if (k + 1e-7 <= 1.0) {
      CHECK_FALSE(is_cp(regularize_channel(ch, k + 1e-7), 1e-8).cp);
    }
  }
}

TEST_CASE("cp channels are closed under mixing") {
  RandomStream rng(408);
  int found = 0;
  while (found < 50) {
    const AffineChannel a = random_channel(rng, 0.2, 1.0);
    const AffineChannel b = random_channel(rng, 0.2, 1.0);
    if (!is_cp(a, 1e-9).cp || !is_cp(b, 1e-9).cp) {
      continue;
    }
    ++found;
    const double w = rng.uniform01();
    const AffineChannel mix(w * a.T + (1.0 - w) * b.T,
                            w * a.t + (1.0 - w) * b.t);
    CHECK(is_cp(mix, 1e-9).min_eigenvalue >= -1e-9);
  }
}

TEST_CASE("channel distance oracles") {
  RandomStream rng(409);
  const DistanceEstimate self =
      channel_distance(unot(), unot(), 2000, rng);
  CHECK(self.mean == 0.0);
  CHECK(self.standard_error == 0.0);

  // The integrand is constant over pure states, so the Monte Carlo mean is
  // exact and its spread vanishes.
  const DistanceEstimate third =
      channel_distance(unot(), unot_optimal(), 20000, rng);
  CHECK(std::abs(third.mean - 1.0 / 3) < 1e-12);
  CHECK(third.standard_error < 1e-12);

  const DistanceEstimate half =
      channel_distance(unot(), average_channel(), 20000, rng);
  CHECK(std::abs(half.mean - 0.5) < 1e-12);

  CHECK_THROWS_AS(channel_distance(unot(), unot(), 0, rng),
                  std::invalid_argument);
}

TEST_CASE("channel distance is symmetric and metric-like") {
  RandomStream rng(410);
  for (int trial = 0; trial < 5; ++trial) {
    const AffineChannel a = random_channel(rng, 0.2, 1.0);
    const AffineChannel b = random_channel(rng, 0.2, 1.0);
    const AffineChannel c = random_channel(rng, 0.2, 1.0);

    RandomStream s1(1000 + static_cast<std::uint64_t>(trial));
    RandomStream s2(1000 + static_cast<std::uint64_t>(trial));
    const DistanceEstimate ab = channel_distance(a, b, 4000, s1);
    const DistanceEstimate ba = channel_distance(b, a, 4000, s2);
    CHECK(ab.mean == ba.mean);

    RandomStream s3(2000 + static_cast<std::uint64_t>(trial));
    RandomStream s4(2000 + static_cast<std::uint64_t>(trial));
    RandomStream s5(2000 + static_cast<std::uint64_t>(trial));
    const DistanceEstimate ac = channel_distance(a, c, 4000, s3);
    const DistanceEstimate cb = channel_distance(c, b, 4000, s4);
    const DistanceEstimate ab2 = channel_distance(a, b, 4000, s5);
    const double slack = 3.0 * (ac.standard_error + cb.standard_error +
                                ab2.standard_error);
    CHECK(ab2.mean <= ac.mean + cb.mean + slack);
  }
}

TEST_CASE("as_transform matches apply") {
  RandomStream rng(411);
  const AffineChannel ch = random_channel(rng);
  const StateTransform f = as_transform(ch);
  for (int trial = 0; trial < 10; ++trial) {
    const BlochVector r = random_pure_bloch(rng);
    CHECK((f(r) - ch.apply(r)).norm() < 1e-15);
  }
}

}  // namespace
