// Copyright 2026 The Authors.
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

#include <gtest/gtest.h>

#include <cmath>

#include "cutplane/oracles.hpp"
#include "cutplane/rng.hpp"

using namespace cutplane;

namespace {

Vector random_in_ball(Eigen::Index n, double radius, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = standard_normal(rng);
  return v * (radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(n)) / v.norm());
}

std::vector<Vector> hexagon() {
  std::vector<Vector> vs;
  for (int k = 0; k < 6; ++k) {
    const double a = M_PI / 3.0 * k + 0.2;
    vs.push_back(Eigen::Vector2d(std::cos(a), 0.7 * std::sin(a)));
  }
  return vs;
}

double support(const std::vector<Vector>& vs, const Vector& c) {
  double best = -INFINITY;
  for (const auto& v : vs) best = std::max(best, c.dot(v));
  return best;
}

}  // namespace

TEST(SubgradToSeparation, ZeroSubgradientIsNearOptimal) {
  const auto r = subgrad_to_separation(Vector::Zero(2), Vector::Zero(2), 1.0, 0.0);
  EXPECT_TRUE(r.near_optimal());
}

TEST(SubgradToSeparation, NormalizesDirection) {
  const auto r = subgrad_to_separation(Vector::Zero(2), Eigen::Vector2d(3, 4), 1.0, 0.0);
  ASSERT_FALSE(r.near_optimal());
  EXPECT_NEAR(r.half.c(0), 0.6, 1e-15);
  EXPECT_NEAR(r.half.c(1), 0.8, 1e-15);
  EXPECT_EQ(r.half.offset, 0.0);
}

TEST(SubgradToSeparation, SupNormExample) {
  const Vector x = Eigen::Vector2d(0.5, 0.2);
  const auto r = subgrad_to_separation(x, Eigen::Vector2d(1, 0), 1.0, 1e-6);
  ASSERT_FALSE(r.near_optimal());
  EXPECT_NEAR(r.half.offset, 2e-3, 1e-15);
  const Vector minimizer = Vector::Zero(2);
  EXPECT_LE(r.half.c.dot(minimizer), r.half.c.dot(x) + r.half.offset);
}

TEST(SubgradToSeparation, HalfspaceContainsLevelSet) {
  Rng rng(21);
  const double D = 2.0;
  // f(z) = max_k |z_k| + 0.3 ||z - z0||^2 with an exact subgradient.
  const Vector z0 = Eigen::Vector3d(0.1, -0.4, 0.2);
  auto f = [&](const Vector& z) { return z.cwiseAbs().maxCoeff() + 0.3 * (z - z0).squaredNorm(); };
  auto grad = [&](const Vector& z) {
    Eigen::Index k;
    z.cwiseAbs().maxCoeff(&k);
    Vector g = 0.6 * (z - z0);
    g(k) += z(k) >= 0 ? 1.0 : -1.0;
    return g;
  };
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    const Vector x = random_in_ball(3, D, rng);
    const auto r = subgrad_to_separation(x, grad(x), D, 1e-8);
    if (r.near_optimal()) continue;
    for (int s = 0; s < 400; ++s) {
      const Vector y = random_in_ball(3, D, rng);
      if (f(y) > f(x)) continue;
      ++checked;
      EXPECT_LE(r.half.c.dot(y), r.half.c.dot(x) + r.half.offset + 1e-12);
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(LevelSetCut, ApproximateSubgradientKeepsLevelSet) {
  Rng rng(22);
  auto f = [](const Vector& z) { return z.squaredNorm(); };
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const Vector x = random_in_ball(2, 1.0, rng);
    const Vector xp = x + 0.05 * random_in_ball(2, 1.0, rng);
    // The gradient at a nearby point is a ||x - xp||^2-subgradient at x.
    const double delta = (x - xp).squaredNorm();
    const auto r = level_set_cut(2.0 * xp, 1.0, delta);
    if (r.near_optimal()) continue;
    for (int s = 0; s < 300; ++s) {
      const Vector y = random_in_ball(2, 1.0, rng);
      if (f(y) > f(x)) continue;
      ++checked;
      EXPECT_LE(r.half.c.dot(y), r.half.c.dot(x) + r.half.offset + 1e-12);
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(LevelSetCut, SmallGradientIsNearOptimal) {
  const auto r = level_set_cut(Eigen::Vector2d(1e-4, 0), 1.0, 1e-3);
  ASSERT_TRUE(r.near_optimal());
  EXPECT_EQ(r.eta, 2e-3);
}

TEST(OptToSubgrad, BoxSignVector) {
  OptOracle o = box_oracle(-Vector::Ones(2), Vector::Ones(2));
  const Vector y = opt_to_subgrad(o, Eigen::Vector2d(2, -1));
  EXPECT_EQ(y, Vector(Eigen::Vector2d(1, -1)));
  EXPECT_EQ(o.call_count(), 1);
}

TEST(OptToSubgrad, SimplexVertex) {
  std::vector<Vector> vs{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 0, 1)};
  OptOracle o = vertex_oracle(vs);
  EXPECT_EQ(opt_to_subgrad(o, Eigen::Vector3d(1, 3, 2)), vs[1]);
}

TEST(OptToSubgrad, HexagonSubgradientInequality) {
  Rng rng(23);
  const auto vs = hexagon();
  OptOracle o = vertex_oracle(vs);
  for (int t = 0; t < 20; ++t) {
    const Vector c = Eigen::Vector2d(standard_normal(rng), standard_normal(rng));
    const Vector y = opt_to_subgrad(o, c);
    EXPECT_NEAR(c.dot(y), support(vs, c), 1e-15);
    for (int s = 0; s < 100; ++s) {
      const Vector d = Eigen::Vector2d(standard_normal(rng), standard_normal(rng));
      EXPECT_GE(support(vs, d) + o.delta(), support(vs, c) + y.dot(d - c) - 1e-12);
    }
  }
}

TEST(BoxSeparation, CutsMostViolatedCoordinate) {
  const auto sep = box_separation(Vector::Zero(3), Vector::Ones(3));
  EXPECT_TRUE(sep(Vector::Constant(3, 0.5)).inside);
  const auto r = sep(Eigen::Vector3d(0.5, -0.2, 1.5));
  ASSERT_FALSE(r.inside);
  EXPECT_EQ(r.half.c, Vector(Eigen::Vector3d(0, 0, 1)));
}

TEST(NormalizeDirection, RejectsZero) {
  EXPECT_THROW(normalize_direction(Vector::Zero(3)), Error);
  EXPECT_NEAR(normalize_direction(Eigen::Vector2d(0, -5)).norm(), 1.0, 1e-15);
}
