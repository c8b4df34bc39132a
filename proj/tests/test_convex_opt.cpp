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

#include "cutplane/convex_opt.hpp"
#include "cutplane/corpus.hpp"
#include "test_oracles.hpp"

using namespace cutplane;

namespace {

OptimizeSpec spec_for(const AffineMax& f, double alpha) {
  OptimizeSpec s;
  s.n = f.n();
  s.alpha = alpha;
  s.oracle = subgradient_oracle([f](const Vector& x) { return f.value(x); },
                                [f](const Vector& x) { return f.subgradient(x); },
                                std::sqrt(static_cast<double>(f.n())));
  return s;
}

// A convex function attains its maximum over the box at a vertex.
double box_max(const std::function<double(const Vector&)>& f, int n) {
  double best = -INFINITY;
  ref::for_each_subset(n, [&](std::uint64_t mask) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    best = std::max(best, f(v));
  });
  return best;
}

}  // namespace

TEST(Minimize, Linear) {
  const double alpha = 0.01;
  const Vector c = Eigen::Vector2d(1, 2);
  OptimizeSpec s;
  s.n = 2;
  s.alpha = alpha;
  s.oracle = subgradient_oracle([c](const Vector& x) { return c.dot(x); },
                                [c](const Vector&) { return c; }, std::sqrt(2.0));
  const OptimizeResult r = minimize(s);
  EXPECT_LE(r.best_value, -3.0 + alpha * 6.0 + 1e-9);
  EXPECT_LE(r.best_x.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Minimize, Quadratic) {
  const double alpha = 0.01;
  OptimizeSpec s;
  s.n = 4;
  s.alpha = alpha;
  s.oracle = subgradient_oracle([](const Vector& x) { return x.squaredNorm(); },
                                [](const Vector& x) { return Vector(2.0 * x); }, 2.0);
  const OptimizeResult r = minimize(s);
  EXPECT_LE(r.best_value, alpha * 4.0 + 1e-9);
}

TEST(Minimize, AffineMaxAgainstGridSearch) {
  const double alpha = 0.01;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const AffineMax f = affine_max_instance(3, seed, 5);
    const auto value = [&f](const Vector& x) { return f.value(x); };
    const double fmin = ref::grid_minimum(value, 3, 1.0, 61, 16);
    const double fmax = box_max(value, 3);
    const OptimizeResult r = minimize(spec_for(f, alpha));
    EXPECT_LE(r.best_value - fmin, alpha * (fmax - fmin) + 1e-9) << "seed " << seed;
    EXPECT_GE(r.best_value, fmin - 1e-6) << "seed " << seed;
  }
}

TEST(Minimize, BestValueIsPrefixMinimumOfLog) {
  const AffineMax f = affine_max_instance(4, 9);
  const OptimizeResult r = minimize(spec_for(f, 0.01));
  ASSERT_FALSE(r.query_log.empty());
  EXPECT_EQ(static_cast<long>(r.query_log.size()), r.oracle_calls);
  double running = INFINITY;
  for (const auto& q : r.query_log) {
    const double next = std::min(running, q.value);
    EXPECT_LE(next, running);
    running = next;
    EXPECT_LE(q.x.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(q.value, f.value(q.x));
  }
  EXPECT_EQ(running, r.best_value);
  EXPECT_DOUBLE_EQ(f.value(r.best_x), r.best_value);
}

TEST(Minimize, RestrictedDomain) {
  // Minimize x_0 + x_1 over the box [0.2, 0.6]^2 presented as a domain oracle.
  const Vector c = Vector::Ones(2);
  OptimizeSpec s;
  s.n = 2;
  s.alpha = 0.01;
  s.domain = box_separation(Vector::Constant(2, 0.2), Vector::Constant(2, 0.6));
  s.min_width = 0.4;
  s.oracle = subgradient_oracle([c](const Vector& x) { return c.dot(x); },
                                [c](const Vector&) { return c; }, std::sqrt(2.0));
  const OptimizeResult r = minimize(s);
  EXPECT_LE(r.best_value, 0.4 + 0.01 * 0.8 + 1e-9);
  EXPECT_GE(r.best_x.minCoeff(), 0.2);
}

TEST(Minimize, RejectsBadAlpha) {
  OptimizeSpec s;
  s.n = 2;
  s.alpha = 1.5;
  s.oracle = [](const Vector&) { return FunctionSepResponse{}; };
  try {
    minimize(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(OptimizeWidth, DefaultKappa) {
  OptimizeSpec s;
  s.n = 4;
  s.alpha = 0.01;
  const double expect = 0.01 * 2.0 / (8.0 * std::log(8.0));
  EXPECT_NEAR(optimize_width(s), expect, 1e-15);
}
