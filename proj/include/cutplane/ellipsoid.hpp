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

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/oracles.hpp"

namespace cutplane {

// Classical central/deep-cut ellipsoid method, kept as a reference solver.

enum class EllipsoidStop {
  kMinWidth,      // stop when the smallest semi-axis is below eps
  kMeanRadius,    // stop when the geometric-mean radius is below eps
};

struct EllipsoidResult {
  bool found = false;
  Vector x;
  long iterations = 0;
  long oracle_calls = 0;
  double final_log_volume = 0.0;  // sum of log semi-axes
};

inline EllipsoidResult ellipsoid_baseline(const SeparationOracle& oracle, int n,
                                          double R, double eps,
                                          EllipsoidStop stop = EllipsoidStop::kMinWidth,
                                          long max_iter = -1) {
  if (n < 1 || !(R > 0) || !(eps > 0)) fail(ErrorCode::kInvalidInput, "ellipsoid args");
  const double dn = n;
  if (max_iter < 0) {
    max_iter = static_cast<long>(std::ceil(8.0 * dn * dn * std::log(std::sqrt(dn) * R / eps) +
                                           100.0 * dn * dn + 100.0));
  }
  EllipsoidResult res;
  Vector x = Vector::Zero(n);
  Matrix P = Matrix::Identity(n, n) * (dn * R * R);
  for (long k = 0;; ++k) {
    res.iterations = k;
    Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues().cwiseMax(0.0);
    const double log_vol = 0.5 * ev.array().max(1e-300).log().sum();
    res.final_log_volume = log_vol;
    const double width = std::sqrt(ev.minCoeff());
    const double mean_radius = std::exp(log_vol / dn);
    if ((stop == EllipsoidStop::kMinWidth && width < eps) ||
        (stop == EllipsoidStop::kMeanRadius && mean_radius < eps)) {
      res.found = false;
      res.x = x;
      return res;
    }
    if (k >= max_iter) fail(ErrorCode::kIterationCapExceeded, "ellipsoid cap");
    const SeparationResponse r = oracle(x);
    ++res.oracle_calls;
    if (r.inside) {
      res.found = true;
      res.x = x;
      return res;
    }
    // Keep {z : c^T z <= c^T x + offset}.
    const Vector c = normalize_direction(r.half.c);
    const double beta = std::max(r.half.offset, 0.0) / r.half.c.norm();
    const Vector pc = P * c;
    const double gamma = std::sqrt(c.dot(pc));
    double alpha = -beta / gamma;
    if (alpha <= -1.0) continue;  // cut removes nothing
    alpha = std::max(alpha, -1.0 / dn);  // shallow cuts weaker than this are skipped
    if (n == 1) {
      const double lo = c(0) > 0 ? x(0) - gamma : x(0) + alpha * gamma;
      const double hi = c(0) > 0 ? x(0) - alpha * gamma : x(0) + gamma;
      x(0) = 0.5 * (lo + hi);
      P(0, 0) = 0.25 * (hi - lo) * (hi - lo);
      continue;
    }
    const double tau = (1.0 + dn * alpha) / (dn + 1.0);
    const double sigma = 2.0 * (1.0 + dn * alpha) / ((dn + 1.0) * (1.0 + alpha));
    const double delta = dn * dn * (1.0 - alpha * alpha) / (dn * dn - 1.0);
    const Vector b = pc / gamma;
    x -= tau * b;
    P = delta * (P - sigma * b * b.transpose());
    P = 0.5 * (P + P.transpose());
  }
}

struct EllipsoidMinResult {
  Vector best_x;
  double best_value = std::numeric_limits<double>::infinity();
  long oracle_calls = 0;  // function evaluations only
  long iterations = 0;
};

// Central-cut minimization over B_inf(R): box violations are cut without
// evaluating f; otherwise the subgradient gives the cut. Stops at the
// mean-radius threshold eps.
template <typename F, typename G>
EllipsoidMinResult ellipsoid_minimize(F f, G grad, int n, double R, double eps) {
  EllipsoidMinResult res;
  const SeparationOracle sep = [&](const Vector& x) {
    if (x.cwiseAbs().maxCoeff() > R) {
      Eigen::Index i = 0;
      x.cwiseAbs().maxCoeff(&i);
      Vector c = Vector::Zero(x.size());
      c(i) = x(i) > 0 ? 1.0 : -1.0;
      return SeparationResponse::Cut(c, R - std::abs(x(i)));
    }
    ++res.oracle_calls;
    const double v = f(x);
    if (v < res.best_value) {
      res.best_value = v;
      res.best_x = x;
    }
    return SeparationResponse::Cut(grad(x), 0.0);
  };
  const EllipsoidResult e = ellipsoid_baseline(sep, n, R, eps, EllipsoidStop::kMeanRadius);
  res.iterations = e.iterations;
  return res;
}

}  // namespace cutplane
