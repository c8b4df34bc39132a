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

#include <Eigen/Eigenvalues>

#include "cutplane/convex_opt.hpp"
#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/oracles.hpp"
#include "cutplane/rng.hpp"

namespace cutplane {

// max <C, X> s.t. <A_i, X> = b_i, X psd; dual min b^T y s.t. sum y_i A_i >= C.
struct SdpProblem {
  Matrix C;
  std::vector<Matrix> A;
  Vector b;
  double M = 1.0;
  double K = 2.0;
  double L = 3.0;

  int m() const { return static_cast<int>(C.rows()); }
  int n() const { return static_cast<int>(A.size()); }
};

// Fills M with max(1, ||b||_2, ||C||_F, max ||A_i||_F) unless supplied, then
// K = M + 1 and L = M + 2. The trace and dual-box parts of the contract on M
// are the caller's.
inline SdpProblem make_sdp(Matrix C, std::vector<Matrix> A, Vector b,
                           std::optional<double> M = std::nullopt) {
  SdpProblem p;
  const Eigen::Index m = C.rows();
  if (C.cols() != m || m == 0) fail(ErrorCode::kInvalidInput, "C must be square");
  if (static_cast<Eigen::Index>(A.size()) != b.size() || A.empty()) {
    fail(ErrorCode::kInvalidInput, "need one b entry per constraint");
  }
  auto symmetric = [](const Matrix& x) {
    return (x - x.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
  };
  if (!symmetric(C)) fail(ErrorCode::kInvalidInput, "C is not symmetric");
  double bound = std::max({1.0, b.norm(), C.norm()});
  for (const Matrix& a : A) {
    if (a.rows() != m || a.cols() != m) fail(ErrorCode::kInvalidInput, "constraint size mismatch");
    if (!symmetric(a)) fail(ErrorCode::kInvalidInput, "constraint is not symmetric");
    bound = std::max(bound, a.norm());
  }
  if (M && *M < bound) fail(ErrorCode::kInvalidInput, "M below the norm bound");
  p.C = std::move(C);
  p.A = std::move(A);
  p.b = std::move(b);
  p.M = M.value_or(bound);
  p.K = p.M + 1.0;
  p.L = p.M + 2.0;
  return p;
}

enum class EigenBackend { kRepeatedSquaring, kDense };

struct EigenEstimate {
  Vector u;
  double value = 0.0;
};

// Approximate top eigenvector of Y with -R I <= Y <= R I. Repeated squaring of
// B = Y/R + I normalized by trace, applied to random starts; the best
// Rayleigh quotient over 1 + ceil(log2 m) starts is returned.
inline EigenEstimate max_eigvec(const Matrix& Y, double R, double eps, std::uint64_t seed = 0,
                                EigenBackend backend = EigenBackend::kRepeatedSquaring) {
  const Eigen::Index m = Y.rows();
  if (m == 0 || Y.cols() != m) fail(ErrorCode::kInvalidInput, "Y must be square");
  if (!(R > 0.0) || !(eps > 0.0)) fail(ErrorCode::kInvalidInput, "R and eps must be positive");
  EigenEstimate out;
  if (backend == EigenBackend::kDense) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Y);
    out.u = es.eigenvectors().col(m - 1);
    out.value = es.eigenvalues()(m - 1);
    return out;
  }
  const double delta = std::min(0.5, eps / (2.0 * R));
  const double md = static_cast<double>(m);
  const int k = static_cast<int>(std::ceil(std::log2(std::log(std::pow(md, 1.5) / delta + 1.0) / delta)));
  Matrix B = Y / R + Matrix::Identity(m, m);
  for (int i = 0; i < std::max(k, 0); ++i) {
    B = (B * B).eval();
    const double tr = B.trace();
    if (!(tr > 0.0)) break;
    B /= tr;
  }
  const int starts = 1 + static_cast<int>(std::ceil(std::log2(std::max(md, 2.0))));
  Rng rng(seed);
  out.value = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Vector q(m);
    for (Eigen::Index i = 0; i < m; ++i) q(i) = standard_normal(rng);
    Vector r = B * q;
    double nr = r.norm();
    if (!(nr > 0.0)) {
      r = q;
      nr = r.norm();
    }
    r /= nr;
    const double v = r.dot(Y * r);
    if (v > out.value) {
      out.value = v;
      out.u = r;
    }
  }
  return out;
}

inline Matrix sdp_slack(const SdpProblem& p, const Vector& y) {
  Matrix s = p.C;
  for (int i = 0; i < p.n(); ++i) s -= y(i) * p.A[i];
  return s;
}

// Upper bound on the spectral norm of the slack at y.
inline double slack_bound(const SdpProblem& p, const Vector& y) {
  double r = p.C.norm();
  for (int i = 0; i < p.n(); ++i) r += std::abs(y(i)) * p.A[i].norm();
  return std::max(r, 1e-12);
}

// Rank-one witness v v^T = scale * u u^T; scale is K or 0 (clipped branch).
struct Witness {
  Vector u;
  double scale = 0.0;
};

struct FkSeparation {
  FunctionSepResponse response;
  Vector subgradient;
  Witness witness;
};

struct SdpSettings {
  EigenBackend backend = EigenBackend::kRepeatedSquaring;
  std::uint64_t seed = 0;
  Profile profile = Profile::kPractical;
};

// f_K(y) = b^T y + K max(lambda_max(C - sum y_i A_i), 0) and its subgradient
// b - (v^T A_i v)_i with v v^T the (approximate) maximizing witness.
inline FkSeparation fK_separation(const Vector& y, const SdpProblem& p, double eps,
                                  const SdpSettings& s = {}, std::uint64_t call = 0) {
  if (y.size() != p.n()) fail(ErrorCode::kInvalidInput, "dimension mismatch");
  FkSeparation out;
  const Matrix slack = sdp_slack(p, y);
  const EigenEstimate e =
      max_eigvec(slack, slack_bound(p, y), eps, mix_seed(s.seed, call), s.backend);
  out.witness.u = e.u;
  out.witness.scale = e.value > 0.0 ? p.K : 0.0;
  out.subgradient = p.b;
  for (int i = 0; i < p.n(); ++i) {
    out.subgradient(i) -= out.witness.scale * e.u.dot(p.A[i] * e.u);
  }
  const double D = p.L * std::sqrt(static_cast<double>(p.n()));
  out.response = level_set_cut(out.subgradient, D, p.K * eps);
  out.response.value = p.b.dot(y) + p.K * std::max(e.value, 0.0);
  return out;
}

inline double fK_value(const Vector& y, const SdpProblem& p) {
  const Matrix slack = sdp_slack(p, y);
  Eigen::SelfAdjointEigenSolver<Matrix> es(slack, Eigen::EigenvaluesOnly);
  return p.b.dot(y) + p.K * std::max(es.eigenvalues().maxCoeff(), 0.0);
}

struct DualResult {
  Vector y;
  double value = 0.0;       // f_K(y)
  double objective = 0.0;   // b^T y
  double lambda_max = 0.0;  // of C - sum y_i A_i
  std::vector<Witness> witnesses;  // v_0 first
  long oracle_calls = 0;
  double alpha = 0.0;
};

// Eigenvalue accuracy per oracle call: the cut offset K eps / ||g|| stays far
// below the cutting-plane width.
inline double sdp_eig_eps(const SdpProblem& p, double width) {
  return std::max(1e-3 * width / p.K, 1e-14 * p.L);
}

inline DualResult solve_dual(const SdpProblem& p, double eps_total, const SdpSettings& s = {},
                             const TraceSink& trace = {}) {
  if (!(eps_total > 0.0)) fail(ErrorCode::kInvalidInput, "eps must be positive");
  const int n = p.n();
  DualResult res;
  res.alpha = eps_total / (7.0 * n * p.M * p.K * p.L);
  std::vector<Witness> seen;
  OptimizeSpec spec;
  spec.n = n;
  spec.R = p.L;
  spec.alpha = res.alpha;
  spec.kappa_hint = 1.0;
  spec.profile = s.profile;
  spec.seed = s.seed;
  const double eig_eps = sdp_eig_eps(p, optimize_width(spec));
  spec.oracle = [&](const Vector& y) {
    FkSeparation sep = fK_separation(y, p, eig_eps, s, seen.size());
    sep.response.half.label = static_cast<long>(seen.size());
    seen.push_back(sep.witness);
    return sep.response;
  };
  const OptimizeResult opt = minimize(spec, trace);
  res.oracle_calls = opt.oracle_calls;
  res.y = opt.best_x;
  const Matrix slack = sdp_slack(p, res.y);
  Eigen::SelfAdjointEigenSolver<Matrix> es(slack);
  res.lambda_max = es.eigenvalues().maxCoeff();
  res.objective = p.b.dot(res.y);
  res.value = res.objective + p.K * std::max(res.lambda_max, 0.0);
  if (res.lambda_max > eps_total) {
    fail(ErrorCode::kPreconditionViolated,
         "dual point violates the eps-feasibility guarantee; check the bound M");
  }
  // v_0 from the returned point, then the witnesses behind the oracle rows
  // still present in the final polytope, by decreasing leverage.
  const EigenEstimate top = max_eigvec(slack, slack_bound(p, res.y), eig_eps,
                                       mix_seed(s.seed, ~0ULL), s.backend);
  res.witnesses.push_back({top.u, p.K});
  const CpmState& st = opt.final_state;
  const double lambda = make_params(s.profile, n, p.L, opt.eps).lambda;
  const Vector psi = leverage_exact(st.A, st.slack(), lambda);
  std::vector<Eigen::Index> order;
  for (Eigen::Index r = 0; r < st.rows(); ++r) {
    if (st.tags[r].origin == RowOrigin::kOracleCut && st.tags[r].label >= 0) order.push_back(r);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return psi(a) > psi(b); });
  for (Eigen::Index r : order) {
    const Witness& w = seen.at(static_cast<std::size_t>(st.tags[r].label));
    // Repeated witnesses add nothing to the hull.
    const bool dup = std::any_of(res.witnesses.begin(), res.witnesses.end(), [&](const Witness& v) {
      return v.scale == w.scale && (w.scale == 0.0 || std::abs(v.u.dot(w.u)) > 1.0 - 1e-12);
    });
    if (!dup) res.witnesses.push_back(w);
  }
  return res;
}

struct PrimalResult {
  Matrix X;
  Vector alpha;              // weights on the witnesses, summing to 1
  double objective = 0.0;    // <C, X>
  double residual = 0.0;     // sum_i |b_i - <A_i, X>|
  double g_value = 0.0;      // objective - L residual
  long oracle_calls = 0;
};

inline Matrix witness_matrix(const std::vector<Witness>& w, const Vector& alpha) {
  const Eigen::Index m = w.front().u.size();
  Matrix X = Matrix::Zero(m, m);
  for (std::size_t j = 0; j < w.size(); ++j) {
    X += alpha(static_cast<Eigen::Index>(j)) * w[j].scale * w[j].u * w[j].u.transpose();
  }
  return X;
}

// Maximizes g(alpha) = -L sum_i |b_i - sum_j alpha_j v_j^T A_i v_j| +
// sum_j alpha_j v_j^T C v_j over the simplex. Coordinates are beta = alpha_1..
// with alpha_0 = 1 - sum beta, shifted so that the start is alpha = 1/count.
inline PrimalResult recover_primal_over(const SdpProblem& p, const std::vector<Witness>& w,
                                        double eps, const SdpSettings& s = {}) {
  if (w.empty()) fail(ErrorCode::kEmptyVector, "no witnesses");
  const int n = p.n();
  const int count = static_cast<int>(w.size());
  Matrix a(n, count);  // a(i, j) = v_j^T A_i v_j
  Vector c(count);
  for (int j = 0; j < count; ++j) {
    const Vector& u = w[j].u;
    c(j) = w[j].scale * u.dot(p.C * u);
    for (int i = 0; i < n; ++i) a(i, j) = w[j].scale * u.dot(p.A[i] * u);
  }
  auto g_of = [&](const Vector& alpha, Vector* grad) {
    const Vector r = p.b - a * alpha;
    const double g = -p.L * r.cwiseAbs().sum() + c.dot(alpha);
    if (grad) {
      Vector sign = r.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
      *grad = p.L * a.transpose() * sign + c;
    }
    return g;
  };
  PrimalResult res;
  if (count == 1) {
    res.alpha = Vector::Ones(1);
  } else {
    const int k = count - 1;
    const double start = 1.0 / count;
    auto alpha_of = [&](const Vector& z) {
      Vector alpha(count);
      alpha.tail(k) = z.array() + start;
      alpha(0) = 1.0 - alpha.tail(k).sum();
      return alpha;
    };
    const SeparationOracle simplex = [&](const Vector& z) {
      const Vector alpha = alpha_of(z);
      Eigen::Index j = 0;
      if (alpha.minCoeff(&j) < 0.0) {
        // alpha_j >= 0 reads -z_j <= start for j >= 1 and sum z <= 1 - count*start
        // for j = 0.
        Vector cdir = j == 0 ? Vector::Ones(k) : Vector(-Vector::Unit(k, j - 1));
        return SeparationResponse::Cut(cdir, 0.0);
      }
      return SeparationResponse::Inside();
    };
    double range = std::abs(c.maxCoeff()) + std::abs(c.minCoeff());
    range += p.L * (p.b.cwiseAbs().sum() + a.cwiseAbs().colwise().sum().maxCoeff());
    OptimizeSpec spec;
    spec.n = k;
    spec.R = 1.0;
    spec.alpha = std::min(0.5, eps / (4.0 * std::max(range, 1.0)));
    spec.kappa_hint = 1.0;
    spec.min_width = 1.0 / count;
    spec.domain = simplex;
    spec.profile = s.profile;
    spec.seed = s.seed;
    spec.oracle = [&](const Vector& z) {
      const Vector alpha = alpha_of(z);
      Vector grad;
      const double g = g_of(alpha, &grad);
      // Minimize -g; d(-g)/dz_j = -(grad_{j+1} - grad_0).
      const Vector sub = -(grad.tail(k).array() - grad(0)).matrix();
      FunctionSepResponse r = subgrad_to_separation(z, sub, std::sqrt(k), 0.0);
      r.value = -g;
      return r;
    };
    const OptimizeResult opt = minimize(spec);
    res.oracle_calls = opt.oracle_calls;
    res.alpha = alpha_of(opt.best_x).cwiseMax(0.0);
    res.alpha /= res.alpha.sum();
  }
  res.X = witness_matrix(w, res.alpha);
  res.objective = (p.C.cwiseProduct(res.X)).sum();
  res.residual = 0.0;
  for (int i = 0; i < n; ++i) res.residual += std::abs(p.b(i) - p.A[i].cwiseProduct(res.X).sum());
  res.g_value = res.objective - p.L * res.residual;
  return res;
}

// Solves over the first 2(n+1) witnesses, doubling the prefix while the
// feasibility residual exceeds eps. Witnesses from solve_dual come ordered
// by leverage, so the prefix holds the rows that pin the final polytope.
inline PrimalResult recover_primal(const SdpProblem& p, const std::vector<Witness>& w,
                                   double eps, const SdpSettings& s = {}) {
  if (w.empty()) fail(ErrorCode::kEmptyVector, "no witnesses");
  std::size_t k = std::min(w.size(), static_cast<std::size_t>(2 * (p.n() + 1)));
  long calls = 0;
  for (;;) {
    const std::vector<Witness> head(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
    PrimalResult res = recover_primal_over(p, head, eps, s);
    calls += res.oracle_calls;
    if (res.residual <= eps || k == w.size()) {
      res.oracle_calls = calls;
      if (res.alpha.size() < static_cast<Eigen::Index>(w.size())) {
        Vector full = Vector::Zero(static_cast<Eigen::Index>(w.size()));
        full.head(res.alpha.size()) = res.alpha;
        res.alpha = full;
      }
      return res;
    }
    k = std::min(w.size(), 2 * k);
  }
}

}  // namespace cutplane
