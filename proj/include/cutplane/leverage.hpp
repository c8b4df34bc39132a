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
#include <cstdint>

#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/rng.hpp"

namespace cutplane {

struct SketchConfig {
  double eps = 0.1;
  double rows_constant = 4.0;
  std::uint64_t seed = 0;
};

inline int sketch_rows(double eps, double rows_constant, double points) {
  if (!(eps > 0.0 && eps <= 0.5)) fail(ErrorCode::kInvalidInput, "eps");
  if (!(rows_constant >= 1.0)) fail(ErrorCode::kInvalidInput, "rows_constant");
  const double k =
      std::ceil(rows_constant / (eps * eps) * std::log(std::max(points, 2.0)));
  return static_cast<int>(k);
}

// k x cols matrix with entries drawn uniformly from {-1/sqrt(k), 1/sqrt(k)}.
inline Matrix jl_matrix(int k, Eigen::Index cols, Rng& rng) {
  Matrix q(k, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (int i = 0; i < k; ++i) q(i, j) = rademacher(rng) * scale;
  }
  return q;
}

// JL estimate of leverage_exact. The sketch acts on the columns of the
// projection onto the range of [S^-1 A; sqrt(lambda) I].
inline Vector sketch_leverage(const Matrix& a, const Vector& s, double lambda,
                              const SketchConfig& cfg) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Matrix ax = scaled_rows(a, s);
  const PdFactor f = detail::gram_factor(ax, lambda);
  Rng rng(cfg.seed);
  const int k = sketch_rows(cfg.eps, cfg.rows_constant, static_cast<double>(m));
  const Matrix q = jl_matrix(k, m + n, rng);
  // Q [Ax; sqrt(lambda) I] = Q_top Ax + sqrt(lambda) Q_bottom.
  Matrix qa = q.leftCols(m) * ax;
  if (lambda > 0.0) qa += std::sqrt(lambda) * q.rightCols(n);
  const Matrix z = f.solve(Matrix(qa.transpose()));  // n x k
  return (ax * z).rowwise().squaredNorm();
}

struct LeverageChangeQuery {
  Matrix a;
  Vector v;
  Vector w;
  double eps = 0.1;
};

inline double leverage_change_alpha(const Vector& v, const Vector& w) {
  return (v - w).cwiseQuotient(v).norm();
}

// Standard weighted leverage scores sigma(w)_i = w_i a_i^T (A^T W A)^-1 a_i.
inline Vector weighted_leverage(const Matrix& a, const Vector& w) {
  const Matrix aw = w.cwiseSqrt().asDiagonal() * a;
  const PdFactor f(Matrix(aw.transpose() * aw));
  return f.half_solve(Matrix(aw.transpose())).colwise().squaredNorm().transpose();
}

namespace detail {

inline int geometric_tail_index(Rng& rng) {
  for (;;) {
    int u = 1;
    while ((rng() >> 63) != 0 && u <= 60) ++u;
    if (u <= 60) return u;
  }
}

}  // namespace detail

// Unbiased estimate of sigma(w) - sigma(v) from a truncated Neumann series
// whose terms are each sketched; the tail is replaced by one randomly chosen
// term reweighted by 2^u.
inline Vector leverage_change(const LeverageChangeQuery& q, std::uint64_t seed) {
  const Matrix& a = q.a;
  const Eigen::Index m = a.rows();
  if (q.v.size() != m || q.w.size() != m) {
    fail(ErrorCode::kInvalidInput, "weight size");
  }
  if (!(q.v.array() > 0.0).all() || !(q.w.array() > 0.0).all()) {
    fail(ErrorCode::kInvalidInput, "weights must be positive");
  }
  const double alpha = leverage_change_alpha(q.v, q.w);
  if (alpha > 0.1) {
    fail(ErrorCode::kPreconditionViolated,
         "||V^-1 (v - w)|| = " + std::to_string(alpha) + " > 1/10");
  }
  Rng rng(seed);
  const Vector diff = q.v - q.w;
  const Matrix av = q.v.cwiseSqrt().asDiagonal() * a;
  const Matrix aw = q.w.cwiseSqrt().asDiagonal() * a;
  const PdFactor bv(Matrix(av.transpose() * av));
  const PdFactor bw(Matrix(aw.transpose() * aw));

  const int kd = sketch_rows(q.eps, 4.0, static_cast<double>(m));
  const Matrix qd = jl_matrix(kd, m, rng);
  const Matrix zd = bw.solve(Matrix((qd * aw).transpose()));  // n x kd
  const Vector d_hat = (a * zd).rowwise().squaredNorm();

  const int t = static_cast<int>(std::ceil(2.0 * std::log2(1.0 / q.eps)));
  const int u = detail::geometric_tail_index(rng);
  const int kf = sketch_rows(q.eps, 4.0, static_cast<double>(m) * t);
  const Matrix qf = jl_matrix(kf, m, rng);

  // C = A^T (V - W) A B^{-1}; since B is symmetric, C = (B^{-1} A^T D A)^T.
  const Matrix adiff = diff.asDiagonal() * a;
  const Matrix c = bv.solve(Matrix(a.transpose() * adiff)).transpose();
  const Vector dplus = diff.cwiseMax(0.0).cwiseSqrt();
  const Vector dminus = (-diff).cwiseMax(0.0).cwiseSqrt();

  // Row sketches times B^{-1}: each is k x n.
  Matrix ze = bv.solve(Matrix((qf * av).transpose())).transpose();
  Matrix zp = bv.solve(Matrix((qf * dplus.asDiagonal() * a).transpose())).transpose();
  Matrix zm = bv.solve(Matrix((qf * dminus.asDiagonal() * a).transpose())).transpose();

  const int top = t + u;
  Vector f_hat = Vector::Zero(m);
  for (int l = 0; 2 * l <= top; ++l) {
    if (l > 0) {
      ze = ze * c;
      zp = zp * c;
      zm = zm * c;
    }
    const int even = 2 * l;
    const int odd = 2 * l + 1;
    if (even >= 1) {
      const bool in_head = even <= t;
      const bool is_tail = even == top;
      if (in_head || is_tail) {
        const Vector term = (a * ze.transpose()).rowwise().squaredNorm();
        if (in_head) f_hat += term;
        if (is_tail) f_hat += std::ldexp(1.0, u) * term;
      }
    }
    if (odd <= top) {
      const bool in_head = odd <= t;
      const bool is_tail = odd == top;
      if (in_head || is_tail) {
        const Vector term = (a * zp.transpose()).rowwise().squaredNorm() -
                            (a * zm.transpose()).rowwise().squaredNorm();
        if (in_head) f_hat += term;
        if (is_tail) f_hat += std::ldexp(1.0, u) * term;
      }
    }
  }
  return (q.w - q.v).cwiseProduct(d_hat) + q.v.cwiseProduct(f_hat);
}

}  // namespace cutplane
