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
#include <vector>

#include "cutplane/cpm.hpp"
#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/oracles.hpp"

namespace cutplane {

struct OptimizeSpec {
  FunctionOracle oracle;
  int n = 0;
  double R = 1.0;
  double alpha = 0.01;
  std::optional<double> kappa_hint;
  // Separation oracle for the domain; points it rejects are cut without
  // consulting f. Empty means the box B_inf(R).
  SeparationOracle domain;
  // Minimum width of the domain, 2R for the box.
  std::optional<double> min_width;
  Profile profile = Profile::kPractical;
  std::uint64_t seed = 0;
  double width_constant = 1.0;
};

struct QueryRecord {
  Vector x;
  double value = 0.0;
};

struct OptimizeResult {
  enum class Termination { kNearOptimalFlag, kWidthExhausted };
  Vector best_x;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<QueryRecord> query_log;
  Termination termination = Termination::kWidthExhausted;
  long oracle_calls = 0;
  long iterations = 0;
  double eps = 0.0;
  std::optional<ThinCertificate> cert;
  CpmState final_state;
};

// Target width alpha * MinWidth / (n^{3/2} ln kappa) with kappa defaulting
// to n^{3/2}.
inline double optimize_width(const OptimizeSpec& spec) {
  const double n = spec.n;
  const double kappa = spec.kappa_hint.value_or(std::pow(n, 1.5));
  const double width = spec.min_width.value_or(2.0 * spec.R);
  const double eps = spec.width_constant * spec.alpha * width /
                     (std::pow(n, 1.5) * std::max(1.0, std::log(kappa)));
  return std::min(eps, 0.5 * spec.R);
}

inline SeparationOracle box_domain(double R) {
  return [R](const Vector& x) {
    Eigen::Index i = 0;
    const double v = x.cwiseAbs().maxCoeff(&i);
    if (v <= R) return SeparationResponse::Inside();
    Vector c = Vector::Zero(x.size());
    c(i) = x(i) > 0 ? 1.0 : -1.0;
    return SeparationResponse::Cut(c, 0.0);
  };
}

// Runs the cutting plane method on the domain with the level-set cuts of f
// and returns the best point queried.
inline OptimizeResult minimize(const OptimizeSpec& spec, const TraceSink& trace = {}) {
  if (spec.n < 1) fail(ErrorCode::kInvalidInput, "dimension must be positive");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) fail(ErrorCode::kInvalidInput, "alpha in (0,1)");
  if (!(spec.R > 0.0)) fail(ErrorCode::kInvalidInput, "R must be positive");
  OptimizeResult res;
  res.eps = optimize_width(spec);
  CpmParams p = make_params(spec.profile, spec.n, spec.R, res.eps);
  p.seed = spec.seed;
  const SeparationOracle domain = spec.domain ? spec.domain : box_domain(spec.R);
  const SeparationOracle sep = [&](const Vector& x) {
    const SeparationResponse d = domain(x);
    if (!d.inside) return d;
    const FunctionSepResponse r = spec.oracle(x);
    ++res.oracle_calls;
    res.query_log.push_back({x, r.value});
    if (r.value < res.best_value) {
      res.best_value = r.value;
      res.best_x = x;
    }
    if (r.near_optimal()) return SeparationResponse::Inside();
    return SeparationResponse{false, r.half};
  };
  CpmOutcome out = run_feasibility(sep, spec.n, p, trace);
  res.iterations = out.iterations;
  res.final_state = std::move(out.final_state);
  if (out.found()) {
    res.termination = OptimizeResult::Termination::kNearOptimalFlag;
  } else {
    res.termination = OptimizeResult::Termination::kWidthExhausted;
    res.cert = std::move(out.cert);
  }
  if (res.query_log.empty()) {
    // The domain rejected every point; evaluate at the final point so the
    // result is never empty.
    const FunctionSepResponse r = spec.oracle(out.x);
    ++res.oracle_calls;
    res.query_log.push_back({out.x, r.value});
    res.best_value = r.value;
    res.best_x = out.x;
  }
  return res;
}

// Function oracle from an exact value and subgradient.
template <typename F, typename G>
FunctionOracle subgradient_oracle(F f, G grad, double D, double delta = 0.0) {
  return [f, grad, D, delta](const Vector& x) {
    FunctionSepResponse r = subgrad_to_separation(x, grad(x), D, delta);
    r.value = f(x);
    return r;
  };
}

}  // namespace cutplane
