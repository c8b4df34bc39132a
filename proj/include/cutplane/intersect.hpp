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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "cutplane/convex_opt.hpp"
#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/matroid.hpp"
#include "cutplane/oracles.hpp"
#include "cutplane/rng.hpp"

namespace cutplane {

// max <c, x> over K1 ∩ K2 from optimization oracles for K1 and K2.
struct IntersectProblem {
  Vector c;
  OptOracle* oracle1 = nullptr;
  OptOracle* oracle2 = nullptr;
  double M = 1.0;
  double lambda = 2.0;
  double delta = 0.1;
};

struct ThetaPoint {
  Vector theta1, theta2, theta3;

  static ThetaPoint unpack(const Vector& v) {
    const Eigen::Index n = v.size() / 3;
    return {v.head(n), v.segment(n, n), v.tail(n)};
  }
  Vector pack() const {
    Vector v(theta1.size() * 3);
    v << theta1, theta2, theta3;
    return v;
  }
};

inline double f_lambda(const Vector& x, const Vector& y, const IntersectProblem& p) {
  const double l = p.lambda;
  return 0.5 * p.c.dot(x) + 0.5 * p.c.dot(y) - 0.5 * l * (x - y).squaredNorm() -
         x.squaredNorm() / (2.0 * l) - y.squaredNorm() / (2.0 * l);
}

inline double g_lambda(const Vector& x, const Vector& y, const ThetaPoint& t,
                       const IntersectProblem& p) {
  const double l = p.lambda;
  return (0.5 * p.c + l * t.theta1 + t.theta2 / l).dot(x) +
         (0.5 * p.c - l * t.theta1 + t.theta3 / l).dot(y) +
         0.5 * l * t.theta1.squaredNorm() + t.theta2.squaredNorm() / (2.0 * l) +
         t.theta3.squaredNorm() / (2.0 * l);
}

inline bool in_omega(const ThetaPoint& t, double M, double tol = 1e-9) {
  return t.theta1.norm() <= 2.0 * M * (1.0 + tol) && t.theta2.norm() <= M * (1.0 + tol) &&
         t.theta3.norm() <= M * (1.0 + tol);
}

struct HValue {
  double value = 0.0;
  Vector x;         // oracle-1 maximizer
  Vector y;         // oracle-2 maximizer
  Vector subgrad;   // packed (theta1, theta2, theta3) subgradient
};

// h_lambda(theta) = max_{x in K1, y in K2} g_lambda(x, y, theta), evaluated
// with one call to each oracle.
inline HValue h_lambda(const ThetaPoint& t, const IntersectProblem& p) {
  if (!in_omega(t, p.M)) fail(ErrorCode::kOutsideOmega, "theta outside Omega");
  const double l = p.lambda;
  HValue h;
  h.x = p.oracle1->query(0.5 * p.c + l * t.theta1 + t.theta2 / l);
  h.y = p.oracle2->query(0.5 * p.c - l * t.theta1 + t.theta3 / l);
  h.value = g_lambda(h.x, h.y, t, p);
  const Eigen::Index n = p.c.size();
  h.subgrad.resize(3 * n);
  h.subgrad << l * (h.x - h.y + t.theta1), (h.x + t.theta2) / l, (h.y + t.theta3) / l;
  return h;
}

// Cut for the product of balls ||theta1|| <= 2M, ||theta2||, ||theta3|| <= M.
inline SeparationOracle omega_separation(Eigen::Index n, double M) {
  return [n, M](const Vector& v) {
    const double radii[3] = {2.0 * M, M, M};
    double worst = 0.0;
    int block = -1;
    for (int b = 0; b < 3; ++b) {
      const double excess = v.segment(b * n, n).norm() / radii[b];
      if (excess > 1.0 && excess > worst) {
        worst = excess;
        block = b;
      }
    }
    if (block < 0) return SeparationResponse::Inside();
    Vector c = Vector::Zero(3 * n);
    c.segment(block * n, n) = v.segment(block * n, n);
    return SeparationResponse::Cut(c, 0.0);
  };
}

struct IntersectSettings {
  // Relative accuracy for the dual minimization; 0 picks the schedule.
  double alpha = 0.0;
  double lambda_cap = 1e4;
  double alpha_floor = 1e-9;
  Profile profile = Profile::kPractical;
  std::uint64_t seed = 0;
};

struct IntersectResult {
  Vector z;
  ThetaPoint theta;
  double h_value = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  bool downgraded = false;   // lambda or alpha was capped
  long oracle_calls = 0;
  std::vector<std::pair<Vector, Vector>> witnesses;  // oracle answers per query
  HValue at_best;
};

// Fills lambda from the schedule lambda = 40 M^2 / delta^2, capped.
inline double schedule_lambda(double M, double delta, double cap) {
  return std::max(2.0, std::min(40.0 * M * M / (delta * delta), cap));
}

// Minimizes h_lambda over Omega with the cutting plane method and reads off
// z = -(theta2' + theta3') / 2. The optimality condition of the inner
// minimization gives theta2* = -x_lambda and theta3* = -y_lambda.
inline IntersectResult solve_intersection(IntersectProblem& p,
                                          const IntersectSettings& s = {}) {
  const Eigen::Index n = p.c.size();
  if (n < 1) fail(ErrorCode::kInvalidInput, "empty cost vector");
  if (p.M < 1.0 || p.lambda < 2.0) fail(ErrorCode::kInvalidInput, "need M >= 1, lambda >= 2");
  if (p.c.norm() > p.M * (1.0 + 1e-12)) fail(ErrorCode::kInvalidInput, "||c|| > M");
  IntersectResult res;
  res.lambda = p.lambda;
  // eps = delta^7 / (1e7 M^6); relative accuracy against the range O(lambda M^2).
  const double eps = std::pow(p.delta, 7) / (1e7 * std::pow(p.M, 6));
  double alpha = s.alpha > 0.0 ? s.alpha : eps / (4.0 * p.lambda * p.M * p.M);
  if (alpha < s.alpha_floor) {
    alpha = s.alpha_floor;
    res.downgraded = true;
  }
  if (40.0 * p.M * p.M / (p.delta * p.delta) > p.lambda * (1.0 + 1e-12)) res.downgraded = true;
  res.alpha = alpha;
  const long calls1 = p.oracle1->call_count();
  const long calls2 = p.oracle2->call_count();
  OptimizeSpec spec;
  spec.n = static_cast<int>(3 * n);
  spec.R = 2.0 * p.M;
  spec.alpha = alpha;
  spec.kappa_hint = 1.0;
  spec.min_width = 2.0 * p.M;
  spec.domain = omega_separation(n, p.M);
  spec.profile = s.profile;
  spec.seed = s.seed;
  HValue best;
  best.value = std::numeric_limits<double>::infinity();
  spec.oracle = [&](const Vector& v) {
    const ThetaPoint t = ThetaPoint::unpack(v);
    HValue h = h_lambda(t, p);
    res.witnesses.emplace_back(h.x, h.y);
    FunctionSepResponse r = subgrad_to_separation(v, h.subgrad, std::sqrt(6.0) * p.M, 0.0);
    r.value = h.value;
    if (h.value < best.value) best = h;
    return r;
  };
  const OptimizeResult opt = minimize(spec);
  res.theta = ThetaPoint::unpack(opt.best_x);
  res.h_value = opt.best_value;
  res.at_best = best;
  res.z = -0.5 * (res.theta.theta2 + res.theta.theta3);
  res.oracle_calls = (p.oracle1->call_count() - calls1) + (p.oracle2->call_count() - calls2);
  return res;
}

// z = 100 n^2 M^2 c + r with r_i uniform on {0, ..., 10 n M}.
inline std::vector<long long> isolation_perturb(const std::vector<long long>& c, int n,
                                                long long M, std::uint64_t seed) {
  if (static_cast<int>(c.size()) != n) fail(ErrorCode::kInvalidInput, "length");
  Rng rng(mix_seed(seed, 0x49534f4cULL));
  const long long scale = 100LL * n * n * M * M;
  std::uniform_int_distribution<long long> noise(0, 10LL * n * M);
  std::vector<long long> z(n);
  for (int i = 0; i < n; ++i) z[i] = scale * c[i] + noise(rng);
  return z;
}

struct MatroidIntersectionResult {
  ElementSet set;
  double weight = 0.0;
  enum class Route { kRoundedWitness, kQueriedPair } route = Route::kRoundedWitness;
  int attempts = 0;
  long oracle_calls = 0;
  IntersectResult last;
};

struct MatroidIntersectionSettings {
  double delta = 0.5;
  int max_attempts = 4;
  IntersectSettings solve;
  // Also consider X ∩ Y for every pair of greedy answers seen during the
  // solve, and return the heavier of the verified candidates.
  bool queried_pair_fallback = true;
};

namespace detail {

inline std::optional<ElementSet> round_half(const Vector& v) {
  ElementSet s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i) - std::round(v(i))) > 0.5 - 1e-9) return std::nullopt;
    const double r = std::round(v(i));
    if (r != 0.0 && r != 1.0) return std::nullopt;
    if (r == 1.0) s.push_back(static_cast<int>(i));
  }
  return s;
}

inline ElementSet common_part(const Vector& x, const Vector& y) {
  ElementSet s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.5 && y(i) > 0.5) s.push_back(static_cast<int>(i));
  }
  return s;
}

}  // namespace detail

// Maximum-weight common independent set for integer weights |w_i| <= Mbound.
// The isolation perturbation is applied to the cost -w of the equivalent
// minimization, so maximization uses 100 n^2 w - r.
inline MatroidIntersectionResult matroid_intersection(
    const Matroid& m1, const Matroid& m2, const std::vector<long long>& w,
    long long Mbound, std::uint64_t seed, const MatroidIntersectionSettings& s = {}) {
  const int n = m1.size();
  if (m2.size() != n || static_cast<int>(w.size()) != n) {
    fail(ErrorCode::kInvalidInput, "ground sets differ");
  }
  for (long long v : w) {
    if (std::llabs(v) > Mbound) fail(ErrorCode::kInvalidInput, "|w| exceeds Mbound");
  }
  Vector wv(n);
  for (int i = 0; i < n; ++i) wv(i) = static_cast<double>(w[i]);
  MatroidIntersectionResult out;
  std::vector<long long> neg(n);
  for (int i = 0; i < n; ++i) neg[i] = -w[i];
  double delta = s.delta;
  for (int attempt = 0; attempt < s.max_attempts; ++attempt) {
    out.attempts = attempt + 1;
    const std::vector<long long> zmin = isolation_perturb(neg, n, 1, mix_seed(seed, attempt));
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = -static_cast<double>(zmin[i]);
    const double zscale = std::max(1.0, z.cwiseAbs().maxCoeff());
    OptOracle o1 = matroid_polytope_oracle(m1);
    OptOracle o2 = matroid_polytope_oracle(m2);
    IntersectProblem prob;
    prob.M = std::sqrt(static_cast<double>(n)) + 1.0;
    prob.c = z / zscale;
    prob.delta = delta;
    prob.lambda = schedule_lambda(prob.M, delta, s.solve.lambda_cap);
    prob.oracle1 = &o1;
    prob.oracle2 = &o2;
    IntersectSettings is = s.solve;
    is.seed = mix_seed(seed, 100 + attempt);
    out.last = solve_intersection(prob, is);
    out.oracle_calls += out.last.oracle_calls;

    std::optional<ElementSet> best;
    double best_z = -std::numeric_limits<double>::infinity();
    auto consider = [&](const ElementSet& cand, MatroidIntersectionResult::Route route) {
      if (!m1.independent(cand) || !m2.independent(cand)) return;
      const double val = set_weight(cand, z);
      if (!best || val > best_z) {
        best = cand;
        best_z = val;
        out.route = route;
      }
    };
    const Vector xw = -out.last.theta.theta2;
    const Vector yw = -out.last.theta.theta3;
    if (auto r = detail::round_half(xw.cwiseMin(yw))) {
      consider(*r, MatroidIntersectionResult::Route::kRoundedWitness);
    }
    if (s.queried_pair_fallback) {
      for (const auto& [x, y] : out.last.witnesses) {
        consider(detail::common_part(x, y), MatroidIntersectionResult::Route::kQueriedPair);
      }
    }
    if (best) {
      out.set = *best;
      out.weight = set_weight(out.set, wv);
      return out;
    }
    delta *= 0.5;
  }
  fail(ErrorCode::kRoundingFailed, "rounded set failed an independence check");
}

}  // namespace cutplane
