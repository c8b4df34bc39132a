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
#include <functional>
#include <string>
#include <vector>

#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"

namespace cutplane {

// Either "inside" or a halfspace c^T z <= c^T x + offset valid for every z in
// the target set, where x is the queried point. label is an opaque tag that
// the caller can use to identify the constraint later.
struct Halfspace {
  Vector c;
  double offset = 0.0;
  long label = -1;
};

struct SeparationResponse {
  bool inside = false;
  Halfspace half;

  static SeparationResponse Inside() { return {true, {}}; }
  static SeparationResponse Cut(Vector c, double offset = 0.0, long label = -1) {
    return {false, {std::move(c), offset, label}};
  }
};

// For a function oracle, NearOptimal asserts f(x) <= min f + eta; Halfspace
// contains the level set {z : f(z) <= f(x)}. value carries f(x).
struct FunctionSepResponse {
  enum class Kind { kNearOptimal, kHalfspace };
  Kind kind = Kind::kHalfspace;
  Halfspace half;
  double value = 0.0;
  double eta = 0.0;

  bool near_optimal() const { return kind == Kind::kNearOptimal; }
};

using SeparationOracle = std::function<SeparationResponse(const Vector&)>;
using FunctionOracle = std::function<FunctionSepResponse(const Vector&)>;

// Unit vector along c. Directions shorter than 1e-12 are rejected.
inline Vector normalize_direction(const Vector& c) {
  const double norm = c.norm();
  if (!(norm >= 1e-12) || !std::isfinite(norm)) {
    fail(ErrorCode::kInvalidInput, "degenerate oracle direction");
  }
  return c / norm;
}

// Linear optimization oracle over a convex body K: query(c) returns y in K
// with max_{x in K} <c, x> <= <c, y> + delta.
class OptOracle {
 public:
  using Fn = std::function<Vector(const Vector&)>;

  OptOracle() = default;
  OptOracle(Fn fn, double delta = 0.0) : fn_(std::move(fn)), delta_(delta) {}

  Vector query(const Vector& c) {
    ++call_count_;
    return fn_(c);
  }

  double delta() const { return delta_; }
  long call_count() const { return call_count_; }
  void reset_count() { call_count_ = 0; }

 private:
  Fn fn_;
  double delta_ = 0.0;
  long call_count_ = 0;
};

// Turns a delta-subgradient g at x into a separation answer for f on the
// ball of radius D.
inline FunctionSepResponse subgrad_to_separation(const Vector& x, const Vector& g,
                                                 double D, double delta) {
  (void)x;
  FunctionSepResponse out;
  const double slack = 2.0 * std::sqrt(delta * D);
  const double gnorm = g.norm();
  if (gnorm <= 0.5 * std::sqrt(delta / D)) {
    out.kind = FunctionSepResponse::Kind::kNearOptimal;
    out.eta = slack;
    return out;
  }
  out.kind = FunctionSepResponse::Kind::kHalfspace;
  out.half.c = g / gnorm;
  out.half.offset = slack;
  return out;
}

// Cut for the level set {z : f(z) <= f(x)} from a delta-subgradient g at x:
// f(z) >= f(x) + g^T (z - x) - delta gives offset delta / ||g||. When
// 2 D ||g|| <= delta, x is within 2 delta of the minimum over the ball of
// radius D.
inline FunctionSepResponse level_set_cut(const Vector& g, double D, double delta) {
  FunctionSepResponse out;
  const double gnorm = g.norm();
  if (2.0 * D * gnorm <= delta) {
    out.kind = FunctionSepResponse::Kind::kNearOptimal;
    out.eta = 2.0 * delta;
    return out;
  }
  out.kind = FunctionSepResponse::Kind::kHalfspace;
  out.half.c = g / gnorm;
  out.half.offset = delta / gnorm;
  return out;
}

// The maximizer returned by an optimization oracle is a delta-subgradient of
// the support function c -> max_{x in K} <c, x>.
inline Vector opt_to_subgrad(OptOracle& oracle, const Vector& c) {
  return oracle.query(c);
}

// Optimization oracle over the convex hull of an explicit vertex list; ties
// go to the lowest index.
inline OptOracle vertex_oracle(std::vector<Vector> vertices) {
  if (vertices.empty()) fail(ErrorCode::kEmptyVector, "no vertices");
  return OptOracle([vs = std::move(vertices)](const Vector& c) {
    std::size_t best = 0;
    double best_val = c.dot(vs[0]);
    for (std::size_t i = 1; i < vs.size(); ++i) {
      const double v = c.dot(vs[i]);
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    return vs[best];
  });
}

inline OptOracle box_oracle(const Vector& lo, const Vector& hi) {
  return OptOracle([lo, hi](const Vector& c) {
    Vector y(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) y(i) = c(i) >= 0.0 ? hi(i) : lo(i);
    return y;
  });
}

// Separation oracle for {z : lo <= z <= hi}; cuts on the most violated
// coordinate, lowest index on ties.
inline SeparationOracle box_separation(const Vector& lo, const Vector& hi) {
  return [lo, hi](const Vector& x) {
    Eigen::Index best = -1;
    double viol = 0.0;
    double sign = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (lo(i) - x(i) > viol) {
        viol = lo(i) - x(i);
        best = i;
        sign = -1.0;
      }
      if (x(i) - hi(i) > viol) {
        viol = x(i) - hi(i);
        best = i;
        sign = 1.0;
      }
    }
    if (best < 0) return SeparationResponse::Inside();
    Vector c = Vector::Zero(x.size());
    c(best) = sign;
    return SeparationResponse::Cut(c, 0.0);
  };
}

}  // namespace cutplane
