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

#include <algorithm>
#include <cmath>

#include "cutplane/corpus.hpp"
#include "cutplane/sdp.hpp"
#include "test_oracles.hpp"

using namespace cutplane;

namespace {

Matrix random_symmetric(int m, Rng& rng) {
  Matrix g(m, m);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = standard_normal(rng);
  return 0.5 * (g + g.transpose());
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double true_fK(const SdpProblem& p, const Vector& y) {
  return p.b.dot(y) + p.K * std::max(ref::jacobi_lambda_max(sdp_slack(p, y)), 0.0);
}

double grid_dual(const SdpProblem& p) {
  const int n = p.n();
  return ref::grid_minimum([&](const Vector& y) { return true_fK(p, y); }, n, p.L,
                           n >= 3 ? 17 : 33, 40, nullptr, n >= 3 ? 4 : 8);
}

// n = 1, A_1 = I, b = 1: the dual optimum is lambda_max(C).
SdpProblem trace_one(const Matrix& C) {
  const Eigen::Index m = C.rows();
  return make_sdp(C, {Matrix::Identity(m, m)}, Vector::Ones(1));
}

}  // namespace

TEST(MakeSdp, DefaultsFromNorms) {
  const SdpProblem p = make_sdp(Matrix::Identity(2, 2) * 3.0, {Matrix::Identity(2, 2)}, Vector::Ones(1));
  EXPECT_NEAR(p.M, 3.0 * std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(p.K, p.M + 1.0);
  EXPECT_DOUBLE_EQ(p.L, p.M + 2.0);
  const SdpProblem q = make_sdp(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)}, Vector::Ones(1), 5.0);
  EXPECT_DOUBLE_EQ(q.M, 5.0);
}

TEST(MakeSdp, RejectsBadInput) {
  Matrix asym = Matrix::Zero(2, 2);
  asym(0, 1) = 1.0;
  EXPECT_THROW(make_sdp(asym, {Matrix::Identity(2, 2)}, Vector::Ones(1)), Error);
  EXPECT_THROW(make_sdp(Matrix::Zero(2, 2), {asym}, Vector::Ones(1)), Error);
  EXPECT_THROW(make_sdp(Matrix::Zero(2, 2), {Matrix::Identity(3, 3)}, Vector::Ones(1)), Error);
  EXPECT_THROW(make_sdp(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)}, Vector::Ones(2)), Error);
  EXPECT_THROW(make_sdp(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)}, Vector::Ones(1), 1.0), Error);
}

TEST(MaxEigvec, Diagonal) {
  Matrix Y = Matrix::Zero(2, 2);
  Y(0, 0) = 1.0;
  Y(1, 1) = 2.0;
  const EigenEstimate e = max_eigvec(Y, 2.0, 1e-3, 5);
  EXPECT_GE(e.value, 2.0 - 1e-3);
  EXPECT_NEAR(std::abs(e.u(1)), 1.0, 1e-3);
  EXPECT_NEAR(e.u.norm(), 1.0, 1e-12);
}

TEST(MaxEigvec, Isotropic) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const EigenEstimate e = max_eigvec(Matrix::Identity(4, 4), 1.0, 1e-4, seed);
    EXPECT_GE(e.value, 1.0 - 1e-4);
    EXPECT_NEAR(e.u.norm(), 1.0, 1e-12);
  }
}

TEST(MaxEigvec, MatchesJacobi) {
  Rng rng(11);
  const double eps = 1e-3;
  for (int t = 0; t < 50; ++t) {
    const Matrix Y = random_symmetric(10, rng);
    const double lmax = ref::jacobi_lambda_max(Y);
    const EigenEstimate e = max_eigvec(Y, Y.norm(), eps, static_cast<std::uint64_t>(t));
    EXPECT_GE(e.value, lmax - eps) << t;
    EXPECT_LE(e.value, lmax + 1e-10) << t;
    EXPECT_NEAR(e.value, e.u.dot(Y * e.u), 1e-12);
    const EigenEstimate d = max_eigvec(Y, Y.norm(), eps, 0, EigenBackend::kDense);
    EXPECT_NEAR(d.value, lmax, 1e-9) << t;
  }
}

TEST(MaxEigvec, TighterEpsNeverWorse) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const Matrix Y = random_symmetric(8, rng);
    double prev = -INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
      const double v = max_eigvec(Y, Y.norm(), eps, 99).value;
      EXPECT_GE(v, prev - 1e-12) << t << " " << eps;
      prev = v;
    }
  }
}

TEST(MaxEigvec, RejectsBadArguments) {
  EXPECT_THROW(max_eigvec(Matrix::Identity(2, 2), 0.0, 1e-3), Error);
  EXPECT_THROW(max_eigvec(Matrix::Identity(2, 2), 1.0, 0.0), Error);
  EXPECT_THROW(max_eigvec(Matrix::Zero(2, 3), 1.0, 1e-3), Error);
}

TEST(FkSeparation, ScalarBranches) {
  // C = 0, A_1 = I: f_K(y) = b y + K max(-y, 0).
  const SdpProblem p = make_sdp(Matrix::Zero(3, 3), {Matrix::Identity(3, 3)}, Vector::Constant(1, 0.7));
  const double eps = 1e-6;
  {
    const FkSeparation s = fK_separation(Vector::Constant(1, 0.5), p, eps);
    EXPECT_DOUBLE_EQ(s.witness.scale, 0.0);
    EXPECT_NEAR(s.subgradient(0), 0.7, 1e-12);
    EXPECT_NEAR(s.response.value, 0.35, 1e-12);
  }
  {
    const FkSeparation s = fK_separation(Vector::Constant(1, -0.5), p, eps);
    EXPECT_DOUBLE_EQ(s.witness.scale, p.K);
    EXPECT_NEAR(s.subgradient(0), 0.7 - p.K, 1e-9);
    EXPECT_NEAR(s.response.value, -0.35 + 0.5 * p.K, p.K * eps);
  }
}

TEST(FkSeparation, NegativeDefiniteSlackIsClipped) {
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    Matrix g = random_symmetric(4, rng);
    const Matrix C = -(g * g.transpose()) - Matrix::Identity(4, 4);
    const SdpProblem p = make_sdp(C, {Matrix::Identity(4, 4), random_symmetric(4, rng)},
                                  Vector::Constant(2, 0.3));
    const FkSeparation s = fK_separation(Vector::Zero(2), p, 1e-6);
    EXPECT_DOUBLE_EQ(s.witness.scale, 0.0);
    EXPECT_TRUE(s.subgradient.isApprox(p.b));
  }
}

TEST(FkSeparation, ValueAndSubgradientVsJacobi) {
  Rng rng(14);
  const double eps = 1e-4;
  for (int t = 0; t < 20; ++t) {
    const SdpProblem p = make_sdp(random_symmetric(4, rng),
                                  {random_symmetric(4, rng), random_symmetric(4, rng),
                                   random_symmetric(4, rng)},
                                  Vector::Constant(3, 0.5));
    Vector y(3);
    for (int i = 0; i < 3; ++i) y(i) = uniform(rng, -1.0, 1.0);
    const FkSeparation s = fK_separation(y, p, eps, {}, static_cast<std::uint64_t>(t));
    const double fy = true_fK(p, y);
    EXPECT_NEAR(fK_value(y, p), fy, 1e-9);
    EXPECT_LE(s.response.value, fy + 1e-9);
    EXPECT_GE(s.response.value, fy - p.K * eps);
    // eps-subgradient inequality at random points.
    for (int k = 0; k < 20; ++k) {
      Vector z(3);
      for (int i = 0; i < 3; ++i) z(i) = uniform(rng, -p.L, p.L);
      EXPECT_GE(true_fK(p, z), fy + s.subgradient.dot(z - y) - p.K * eps - 1e-9);
    }
  }
}

TEST(SolveDual, ScalarCaseGivesLambdaMax) {
  Rng rng(15);
  for (int t = 0; t < 5; ++t) {
    const Matrix C = random_symmetric(4, rng) * 0.5;
    const SdpProblem p = trace_one(C);
    const double lmax = ref::jacobi_lambda_max(C);
    const DualResult d = solve_dual(p, 1e-4);
    EXPECT_NEAR(d.value, lmax, 1e-3) << t;
    EXPECT_NEAR(d.y(0), lmax, 1e-3) << t;
    EXPECT_LE(d.lambda_max, 1e-4);
  }
}

TEST(SolveDual, ZeroInstance) {
  const SdpProblem p = trace_one(Matrix::Zero(3, 3));
  const DualResult d = solve_dual(p, 1e-4);
  EXPECT_NEAR(d.value, 0.0, 1e-4);
}

TEST(SolveDual, MatchesGridSearch) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const SdpProblem p = sdp_instance(3, 2, 500 + seed);
    const DualResult d = solve_dual(p, 1e-3);
    EXPECT_NEAR(d.value, grid_dual(p), 1e-3) << seed;
    EXPECT_NEAR(d.value, true_fK(p, d.y), 1e-9);
    EXPECT_LE(d.lambda_max, 1e-3);
    ASSERT_FALSE(d.witnesses.empty());
    EXPECT_DOUBLE_EQ(d.witnesses.front().scale, p.K);
    for (const Witness& w : d.witnesses) EXPECT_NEAR(w.u.norm(), 1.0, 1e-9);
  }
}

TEST(SolveDual, DenseBackendAgrees) {
  const SdpProblem p = sdp_instance(4, 2, 77);
  SdpSettings dense;
  dense.backend = EigenBackend::kDense;
  EXPECT_NEAR(solve_dual(p, 1e-3).value, solve_dual(p, 1e-3, dense).value, 1e-3);
}

TEST(RecoverPrimal, ScalarCase) {
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = 1.0;
  const SdpProblem p = trace_one(C);
  const DualResult d = solve_dual(p, 1e-4);
  const PrimalResult r = recover_primal(p, d.witnesses, 1e-3);
  EXPECT_NEAR(r.objective, 1.0, 1e-3);
  EXPECT_NEAR(r.X(0, 0), 1.0, 1e-2);
  EXPECT_NEAR(r.X(1, 1), 0.0, 1e-2);
  EXPECT_LE(r.residual, 1e-3);
}

TEST(RecoverPrimal, SingleWitness) {
  const SdpProblem p = make_sdp(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)}, Vector::Ones(1));
  const Witness w{Vector::Unit(2, 0), 1.0};
  const PrimalResult r = recover_primal(p, {w}, 1e-3);
  ASSERT_EQ(r.alpha.size(), 1);
  EXPECT_DOUBLE_EQ(r.alpha(0), 1.0);
  EXPECT_NEAR(r.residual, std::abs(1.0 - r.X.trace()), 1e-15);
  EXPECT_NEAR(r.residual, 0.0, 1e-15);
  EXPECT_THROW(recover_primal(p, {}, 1e-3), Error);
}

TEST(RecoverPrimal, WeakDualitySandwich) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int m = 2 + static_cast<int>(seed % 4);
    const int n = 1 + static_cast<int>(seed % 3);
    const SdpProblem p = sdp_instance(m, n, 900 + seed);
    const double eps = 1e-3;
    const DualResult d = solve_dual(p, eps);
    const PrimalResult r = recover_primal(p, d.witnesses, eps);
    EXPECT_LE(r.residual, eps) << seed;
    EXPECT_GE(r.objective, d.value - 2 * eps) << seed;
    EXPECT_LE(r.objective, d.value + 2 * eps) << seed;
    // X is a nonnegative combination of rank-one terms with trace <= K.
    EXPECT_NEAR(r.alpha.sum(), 1.0, 1e-12);
    EXPECT_GE(r.alpha.minCoeff(), 0.0);
    EXPECT_LE(r.X.trace(), p.K + 1e-9);
    EXPECT_GE(ref::jacobi_eigen(r.X).values.minCoeff(), -1e-10);
  }
}
