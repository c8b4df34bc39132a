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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "cutplane/error.hpp"

namespace cutplane {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cholesky factor of a symmetric positive definite matrix. On failure the
// diagonal is shifted by jitter starting at 1e-12 * trace / n and grown by
// 100x for at most three retries.
class PdFactor {
 public:
  PdFactor() = default;
  explicit PdFactor(const Matrix& m) { compute(m); }

  void compute(const Matrix& m) {
    const Eigen::Index n = m.rows();
    if (n != m.cols()) fail(ErrorCode::kInvalidInput, "matrix not square");
    jitter_ = 0.0;
    llt_.compute(m);
    if (n == 0) return;
    if (llt_.info() == Eigen::Success && pivots_ok()) return;
    const double trace = m.trace();
    if (!(trace > 0.0) || !std::isfinite(trace)) {
      fail(ErrorCode::kNotPositiveDefinite, "nonpositive trace");
    }
    double jitter = 1e-12 * trace / static_cast<double>(n);
    for (int attempt = 0; attempt < 3; ++attempt) {
      Matrix shifted = m;
      shifted.diagonal().array() += jitter;
      llt_.compute(shifted);
      if (llt_.info() == Eigen::Success && pivots_ok()) {
        jitter_ = jitter;
        return;
      }
      jitter *= 100.0;
    }
    fail(ErrorCode::kNotPositiveDefinite, "cholesky failed after jitter");
  }

  Vector solve(const Vector& b) const { return llt_.solve(b); }
  Matrix solve(const Matrix& b) const { return llt_.solve(b); }

  // Returns L^{-1} b, so that ||L^{-1} b||^2 = b^T M^{-1} b.
  Matrix half_solve(const Matrix& b) const {
    return llt_.matrixL().solve(b);
  }
  Vector half_solve(const Vector& b) const {
    return llt_.matrixL().solve(b);
  }
  // Rows of B L^{-T}; row i has squared norm b_i^T M^{-1} b_i.
  Matrix row_half_solve(Matrix b) const {
    llt_.matrixU().solveInPlace<Eigen::OnTheRight>(b);
    return b;
  }

  double log_det() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  }

  // Squared ratio of the smallest to the largest Cholesky pivot.
  double pivot_ratio() const {
    const Vector d = llt_.matrixLLT().diagonal();
    if (d.size() == 0) return 1.0;
    const double lo = d.cwiseAbs().minCoeff();
    const double hi = d.cwiseAbs().maxCoeff();
    return hi > 0.0 ? (lo * lo) / (hi * hi) : 0.0;
  }

  double jitter() const { return jitter_; }
  Eigen::Index size() const { return llt_.matrixLLT().rows(); }

 private:
  bool pivots_ok() const {
    const Vector d = llt_.matrixLLT().diagonal();
    return d.allFinite() && (d.array() > 0.0).all();
  }

  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

// Solves M x = b for symmetric positive definite M. One step of iterative
// refinement is applied when the energy-norm error estimate exceeds eps.
inline Vector solve_pd(const Matrix& m, const Vector& b, double eps = 1e-12) {
  if (m.rows() != b.size()) fail(ErrorCode::kInvalidInput, "size mismatch");
  PdFactor factor(m);
  Vector x = factor.solve(b);
  const Vector r = b - m * x;
  const Vector dx = factor.solve(r);
  const double err = dx.dot(m * dx);
  const double scale = x.dot(m * x);
  if (err > eps * scale) x += dx;
  return x;
}

// Rows of S^{-1} A.
inline Matrix scaled_rows(const Matrix& a, const Vector& s) {
  if (a.rows() != s.size()) fail(ErrorCode::kInvalidInput, "slack size");
  if (s.size() > 0 && !(s.array() > 0.0).all()) {
    fail(ErrorCode::kSlackNonpositive, "slack vector has nonpositive entry");
  }
  return s.cwiseInverse().asDiagonal() * a;
}

inline Matrix regularized_gram(const Matrix& ax, double lambda) {
  Matrix g = Matrix::Zero(ax.cols(), ax.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(ax.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  g.diagonal().array() += lambda;
  return g;
}

namespace detail {

inline PdFactor gram_factor(const Matrix& ax, double lambda) {
  PdFactor f(regularized_gram(ax, lambda));
  // Without regularization, needing jitter means A_x lacks full column rank.
  if (lambda == 0.0 && (f.jitter() > 0.0 || f.pivot_ratio() < 1e-13)) {
    fail(ErrorCode::kNotPositiveDefinite, "rank-deficient gram matrix");
  }
  return f;
}

}  // namespace detail

// psi_i = (a_i/s_i)^T (A^T S^-2 A + lambda I)^{-1} (a_i/s_i).
inline Vector leverage_exact(const Matrix& a, const Vector& s, double lambda) {
  const Matrix ax = scaled_rows(a, s);
  const PdFactor f = detail::gram_factor(ax, lambda);
  return f.row_half_solve(ax).rowwise().squaredNorm();
}

inline double quadratic_form(const Matrix& a, const Vector& s, double lambda,
                             const Vector& v) {
  const Matrix ax = scaled_rows(a, s);
  const PdFactor f = detail::gram_factor(ax, lambda);
  return f.half_solve(v).squaredNorm();
}

}  // namespace cutplane
