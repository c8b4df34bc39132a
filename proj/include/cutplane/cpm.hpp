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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cutplane/error.hpp"
#include "cutplane/leverage.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/oracles.hpp"

namespace cutplane {

enum class Profile { kTheoretical, kPractical };
enum class DeltaMode { kExact, kSketch };

struct CpmParams {
  double c_a = 0.1;
  double c_d = 0.01;
  double c_e = 0.0;
  double c_delta = 0.0;
  double lambda = 0.0;
  double R = 1.0;
  double eps = 1e-3;
  int centering_steps = 200;
  Profile profile = Profile::kPractical;
  double k_iter = 5000.0;
  DeltaMode delta_mode = DeltaMode::kExact;
  // Relative accuracy of the sketches used when delta_mode is kSketch.
  double sketch_eps = 0.05;
  // Stop a centering call once the centrality falls below the entry
  // requirement of the next iteration.
  bool early_exit = true;
  std::uint64_t seed = 0;
};

inline double log_dim(int n) { return std::log(std::max(n, 2)); }

inline CpmParams make_params(Profile profile, int n, double R, double eps) {
  if (!(R > 0.0) || !(eps > 0.0) || !(eps < R)) {
    fail(ErrorCode::kInvalidInput, "need 0 < eps < R");
  }
  CpmParams p;
  p.profile = profile;
  p.R = R;
  p.eps = eps;
  const double log_term = std::log(17.0 * n * R / eps);
  if (profile == Profile::kTheoretical) {
    p.c_a = 1e-10;
    p.c_d = 1e-12;
  } else {
    p.c_a = 0.1;
    p.c_d = 0.01;
  }
  p.c_e = p.c_d / (6.0 * log_term);
  p.c_delta = 0.5 * p.c_e / log_dim(n);
  p.lambda = 1.0 / (p.c_a * R * R);
  p.delta_mode = n <= 50 ? DeltaMode::kExact : DeltaMode::kSketch;
  return p;
}

enum class RowOrigin { kInitialBox, kOracleCut };

struct RowTag {
  RowOrigin origin = RowOrigin::kInitialBox;
  long label = -1;
  long query = -1;
};

// Polytope {z : A z >= b} with unit rows, current point and leverage
// estimates tau.
struct CpmState {
  Matrix A;
  Vector b;
  Vector x;
  Vector tau;
  std::vector<RowTag> tags;
  long iteration = 0;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index dim() const { return A.cols(); }
  Vector slack() const { return A * x - b; }
};

inline CpmState initial_state(int n, const CpmParams& p) {
  CpmState st;
  st.A = Matrix::Zero(2 * n, n);
  st.A.topRows(n) = Matrix::Identity(n, n);
  st.A.bottomRows(n) = -Matrix::Identity(n, n);
  st.b = Vector::Constant(2 * n, -p.R);
  st.x = Vector::Zero(n);
  // Box rows are labelled by their row index: i for +e_i, n + i for -e_i.
  st.tags.assign(2 * n, RowTag{});
  for (int k = 0; k < 2 * n; ++k) st.tags[k].label = k;
  st.tau = leverage_exact(st.A, st.slack(), p.lambda);
  return st;
}

inline Vector checked_slack(const CpmState& st) {
  Vector s = st.slack();
  if (s.size() > 0 && !(s.array() > 0.0).all()) {
    fail(ErrorCode::kSlackNonpositive, "point left the polytope");
  }
  return s;
}

inline Vector leverage(const CpmState& st, const CpmParams& p) {
  return leverage_exact(st.A, checked_slack(st), p.lambda);
}

inline double potential(const CpmState& st, const CpmParams& p) {
  const Vector s = checked_slack(st);
  const Matrix ax = scaled_rows(st.A, s);
  const PdFactor g(regularized_gram(ax, p.lambda));
  const Vector psi = g.row_half_solve(ax).rowwise().squaredNorm();
  const Vector e = st.tau - psi;
  const double barrier = -((p.c_e + e.array()) * s.array().log()).sum();
  return barrier + 0.5 * g.log_det() + 0.5 * p.lambda * st.x.squaredNorm();
}

inline Vector gradient(const CpmState& st, const CpmParams& p) {
  const Vector s = checked_slack(st);
  const Matrix ax = scaled_rows(st.A, s);
  const Vector weight = (st.tau.array() + p.c_e).matrix();
  return -ax.transpose() * weight + p.lambda * st.x;
}

// Q(x, w) = A_x^T (c_e I + W) A_x + lambda I.
inline Matrix weighted_hessian(const CpmState& st, const CpmParams& p,
                               const Vector& w) {
  const Vector s = checked_slack(st);
  const Matrix ax = scaled_rows(st.A, s);
  const Vector d = (w.array() + p.c_e).matrix();
  Matrix q = ax.transpose() * d.asDiagonal() * ax;
  q.diagonal().array() += p.lambda;
  return q;
}

inline Matrix hessian(const CpmState& st, const CpmParams& p) {
  return weighted_hessian(st, p, leverage(st, p));
}

inline double centrality(const CpmState& st, const CpmParams& p) {
  const PdFactor h(hessian(st, p));
  return h.half_solve(gradient(st, p)).norm();
}

inline double centering_target(const CpmState& st, const CpmParams& p) {
  const Vector psi = leverage(st, p);
  const double mu = psi.size() ? psi.minCoeff() : 0.0;
  return 0.01 * std::sqrt(p.c_e + mu);
}

struct CenteringReport {
  int steps = 0;
  double delta_initial = 0.0;
  double delta_final = 0.0;
  double max_relative_slack_move = 0.0;
  int damped_steps = 0;
  bool precondition_warning = false;
};

namespace detail {

// Sketched estimate of psi(x_new) - psi(x_old) through the augmented weights
// [s^-2; lambda] on [A; I]. Steps whose weight change exceeds the estimator's
// 1/10 limit are split into equal pieces.
inline Vector sketched_psi_change(const Matrix& a, const Vector& x_old,
                                  const Vector& x_new, const Vector& b,
                                  const CpmParams& p, std::uint64_t seed) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  Matrix aug(m + n, n);
  aug.topRows(m) = a;
  aug.bottomRows(n) = Matrix::Identity(n, n);
  auto weights = [&](const Vector& x) {
    Vector w(m + n);
    const Vector s = a * x - b;
    w.head(m) = s.array().square().inverse().matrix();
    w.tail(n).setConstant(p.lambda);
    return w;
  };
  const Vector w_old = weights(x_old);
  const Vector w_new = weights(x_new);
  const double alpha = leverage_change_alpha(w_old, w_new);
  const int pieces = std::max(1, static_cast<int>(std::ceil(alpha / 0.09)));
  Vector total = Vector::Zero(m);
  Vector prev = x_old;
  Vector wp = w_old;
  for (int k = 1; k <= pieces; ++k) {
    const Vector next = x_old + (x_new - x_old) * (static_cast<double>(k) / pieces);
    const Vector wn = weights(next);
    LeverageChangeQuery q{aug, wp, wn, p.sketch_eps};
    total += leverage_change(q, mix_seed(seed, static_cast<std::uint64_t>(k))).head(m);
    prev = next;
    wp = wn;
  }
  return total;
}

}  // namespace detail

// r steps of x <- x - (1/8) Q^{-1} grad p with Q frozen at the entry point,
// updating tau by the change in leverage after each step.
inline CenteringReport centering(CpmState& st, const CpmParams& p, int r,
                                 std::optional<DeltaMode> mode_override = {},
                                 std::optional<bool> early_exit_override = {},
                                 double target_override = -1.0) {
  const DeltaMode mode = mode_override.value_or(p.delta_mode);
  const bool early_exit = early_exit_override.value_or(p.early_exit);
  CenteringReport rep;
  Vector psi = leverage(st, p);
  const double mu = psi.size() ? psi.minCoeff() : 0.0;
  const Matrix h0 = weighted_hessian(st, p, psi);
  const PdFactor q(h0);
  Vector g = gradient(st, p);
  rep.delta_initial = q.half_solve(g).norm();
  rep.delta_final = rep.delta_initial;
  const double e_inf = (st.tau - psi).cwiseAbs().maxCoeff();
  if (e_inf > p.c_e / 3.0 + 1e-12 ||
      rep.delta_initial > 0.01 * std::sqrt(p.c_e + mu)) {
    if (p.profile == Profile::kTheoretical) {
      fail(ErrorCode::kPreconditionViolated, "centering entry conditions");
    }
    rep.precondition_warning = true;
  }
  const double target =
      target_override >= 0.0 ? target_override : 0.01 * std::sqrt(p.c_e + mu);
  for (int k = 0; k < r; ++k) {
    const Vector step_full = -0.125 * q.solve(g);
    if (early_exit && rep.delta_final <= target) break;
    const Vector s_old = st.slack();
    Vector step = step_full;
    Vector x_new = st.x + step;
    Vector s_new = st.A * x_new - st.b;
    int halvings = 0;
    while (!((s_new.array() > 0.0).all()) ||
           ((s_new - s_old).cwiseQuotient(s_old).cwiseAbs().maxCoeff() > 0.5)) {
      if (++halvings > 60) {
        fail(ErrorCode::kSlackNonpositive, "centering step cannot stay inside");
      }
      step *= 0.5;
      x_new = st.x + step;
      s_new = st.A * x_new - st.b;
    }
    if (halvings > 0) ++rep.damped_steps;
    rep.max_relative_slack_move = std::max(
        rep.max_relative_slack_move, (s_new - s_old).cwiseQuotient(s_old).norm());
    if (mode == DeltaMode::kExact) {
      st.x = x_new;
      const Vector psi_new = leverage(st, p);
      st.tau += psi_new - psi;
      psi = psi_new;
    } else {
      const Vector x_old = st.x;
      st.tau += detail::sketched_psi_change(
          st.A, x_old, x_new, st.b, p,
          mix_seed(p.seed, static_cast<std::uint64_t>(st.iteration) * 1000003ULL + k));
      st.x = x_new;
    }
    g = gradient(st, p);
    rep.delta_final = q.half_solve(g).norm();
    ++rep.steps;
  }
  return rep;
}

// Index of max |w_i - tau_i|, lowest index on ties.
inline Eigen::Index select_refresh_index(const Vector& tau, const Vector& w) {
  if (tau.size() != w.size()) fail(ErrorCode::kInvalidInput, "size mismatch");
  if (tau.size() == 0) fail(ErrorCode::kEmptyVector, "no rows");
  Eigen::Index best = 0;
  double best_val = std::abs(w(0) - tau(0));
  for (Eigen::Index i = 1; i < tau.size(); ++i) {
    const double v = std::abs(w(i) - tau(i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

struct AddCutResult {
  double shift = 0.0;
  double psi_a = 0.0;
};

// Appends a^T z >= a^T x - shift with shift = c_a^{-1/2} sqrt(a^T G^{-1} a),
// raised to min_shift if that is larger, and updates tau by the rank-one rule.
inline AddCutResult add_cut(CpmState& st, const Vector& a, const CpmParams& p,
                            RowTag tag = {RowOrigin::kOracleCut, -1, -1},
                            double min_shift = 0.0) {
  if (a.size() != st.dim()) fail(ErrorCode::kInvalidInput, "dimension");
  if (std::abs(a.norm() - 1.0) > 1e-9) {
    fail(ErrorCode::kNotUnitVector, "cut direction must have unit norm");
  }
  const Vector s = checked_slack(st);
  const Matrix ax = scaled_rows(st.A, s);
  const PdFactor g(regularized_gram(ax, p.lambda));
  const Vector ginv_a = g.solve(a);
  const double quad = a.dot(ginv_a);
  AddCutResult res;
  res.shift = std::max(std::sqrt(quad / p.c_a), min_shift);
  res.psi_a = quad / (res.shift * res.shift);
  const Vector proj = ax * ginv_a / res.shift;
  const Eigen::Index m = st.rows();
  Vector tau(m + 1);
  tau.head(m) = st.tau - proj.array().square().matrix() / (1.0 + res.psi_a);
  tau(m) = res.psi_a / (1.0 + res.psi_a);
  st.A.conservativeResize(m + 1, Eigen::NoChange);
  st.A.row(m) = a.transpose();
  st.b.conservativeResize(m + 1);
  st.b(m) = a.dot(st.x) - res.shift;
  st.tau = tau;
  st.tags.push_back(tag);
  return res;
}

// Deletes row i, which must be the argmin of w with psi_i <= 1.1 mu <= 0.1.
inline double remove_cut(CpmState& st, Eigen::Index i, const Vector& w,
                         const CpmParams& p) {
  const Eigen::Index m = st.rows();
  if (i < 0 || i >= m) fail(ErrorCode::kInvalidInput, "row index");
  Eigen::Index arg = 0;
  w.minCoeff(&arg);
  if (w(i) > w(arg)) {
    fail(ErrorCode::kPreconditionViolated, "removed row is not the argmin of w");
  }
  const Vector s = checked_slack(st);
  const Matrix ax = scaled_rows(st.A, s);
  const PdFactor g(regularized_gram(ax, p.lambda));
  const Matrix z = g.row_half_solve(ax);
  const Vector psi = z.rowwise().squaredNorm();
  const double mu = psi.minCoeff();
  const double psi_d = psi(i);
  if (psi_d > 1.1 * mu + 1e-15 || 1.1 * mu > 0.1) {
    fail(ErrorCode::kPreconditionViolated, "psi of removed row too large");
  }
  const Vector cross = z * z.row(i).transpose();  // A_x G^{-1} A_x^T e_i
  Vector tau = st.tau + cross.array().square().matrix() / (1.0 - psi_d);
  auto drop = [i, m](auto& v) {
    for (Eigen::Index k = i; k + 1 < m; ++k) v(k) = v(k + 1);
    v.conservativeResize(m - 1);
  };
  drop(tau);
  drop(st.b);
  Matrix a(m - 1, st.dim());
  a.topRows(i) = st.A.topRows(i);
  a.bottomRows(m - 1 - i) = st.A.bottomRows(m - 1 - i);
  st.A = a;
  st.tau = tau;
  st.tags.erase(st.tags.begin() + i);
  return psi_d;
}

struct ThinCertificate {
  Matrix A;
  Vector b;
  std::vector<RowTag> tags;
  Eigen::Index pivot = 0;
  Vector t;  // t(pivot) == 0; t_j >= 0 elsewhere
  Vector x;
  double pivot_slack = 0.0;
  double residual = 0.0;            // ||a_pivot + sum_j t_j a_j||
  double slack_combination = 0.0;   // sum_j t_j s_j
  double residual_bound = 0.0;      // 8 sqrt(n) eps / (c_a c_e R)
  double slack_bound = 0.0;         // 3 n s_pivot / c_e
  double x_norm_bound = 0.0;        // 3 sqrt(n) R
};

// Centers for 64 log(2R/eps) more steps and writes a_i for the smallest
// slack as a nonnegative combination of the other rows.
inline ThinCertificate certificate(CpmState& st, const CpmParams& p) {
  const Vector s0 = checked_slack(st);
  if (s0.minCoeff() > p.eps) {
    fail(ErrorCode::kPreconditionViolated, "min slack above eps");
  }
  const int steps = static_cast<int>(std::ceil(64.0 * std::log(2.0 * p.R / p.eps)));
  const Vector psi0 = leverage(st, p);
  const double target = (p.eps / p.R) * std::sqrt(p.c_e + psi0.minCoeff());
  centering(st, p, steps, std::nullopt, true, target);
  const Vector s = checked_slack(st);
  const Vector psi = leverage(st, p);
  const Vector e = st.tau - psi;
  const int n = static_cast<int>(st.dim());
  ThinCertificate cert;
  s.minCoeff(&cert.pivot);
  const Eigen::Index i = cert.pivot;
  const double wi = p.c_e + e(i) + psi(i);
  cert.t = Vector::Zero(st.rows());
  for (Eigen::Index j = 0; j < st.rows(); ++j) {
    if (j == i) continue;
    cert.t(j) = (s(i) / s(j)) * (p.c_e + e(j) + psi(j)) / wi;
  }
  Vector comb = st.A.row(i).transpose() + st.A.transpose() * cert.t;
  cert.residual = comb.norm();
  cert.slack_combination = cert.t.dot(s);
  cert.pivot_slack = s(i);
  cert.residual_bound = 8.0 * std::sqrt(n) * p.eps / (p.c_a * p.c_e * p.R);
  cert.slack_bound = 3.0 * n * s(i) / p.c_e;
  cert.x_norm_bound = 3.0 * std::sqrt(n) * p.R;
  cert.A = st.A;
  cert.b = st.b;
  cert.tags = st.tags;
  cert.x = st.x;
  return cert;
}

struct TraceRecord {
  long k = 0;
  long m = 0;
  double potential = 0.0;
  double min_slack = 0.0;
  double centrality = 0.0;
  std::string action;
  long oracle_calls = 0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct CpmOutcome {
  enum class Kind { kFound, kThin };
  Kind kind = Kind::kThin;
  Vector x;
  std::optional<ThinCertificate> cert;
  long iterations = 0;
  long oracle_calls = 0;
  long e_invariant_failures = 0;
  long precondition_warnings = 0;
  CpmState final_state;

  bool found() const { return kind == Kind::kFound; }
};

inline long iteration_cap(int n, const CpmParams& p) {
  const double logt = std::max(std::log(n * p.R / p.eps), 1.0);
  return static_cast<long>(std::ceil(p.k_iter * n * logt));
}

// The main loop. Each iteration refreshes one tau entry, then either drops
// the row of smallest leverage or asks the oracle at the current point and
// adds the returned cut, and finally recenters.
inline CpmOutcome run_feasibility(const SeparationOracle& oracle, int n,
                                  const CpmParams& p, const TraceSink& trace = {}) {
  if (n < 1) fail(ErrorCode::kInvalidInput, "dimension must be positive");
  CpmOutcome out;
  CpmState st = initial_state(n, p);
  const long cap = iteration_cap(n, p);
  const double row_cap = 1.0 + 2.0 * n / p.c_d;
  for (long k = 0;; ++k) {
    st.iteration = k;
    const Vector s = checked_slack(st);
    if (s.minCoeff() < p.eps) {
      out.kind = CpmOutcome::Kind::kThin;
      out.cert = certificate(st, p);
      out.x = st.x;
      out.iterations = k;
      out.final_state = st;
      return out;
    }
    if (k >= cap) {
      fail(ErrorCode::kIterationCapExceeded,
           "no verdict after " + std::to_string(cap) + " iterations");
    }
    Vector psi = leverage(st, p);
    Vector w = psi;
    if (p.delta_mode == DeltaMode::kSketch) {
      SketchConfig cfg{std::min(0.5, std::max(p.sketch_eps, p.c_delta)), 4.0,
                       mix_seed(p.seed, static_cast<std::uint64_t>(k))};
      w = sketch_leverage(st.A, s, p.lambda, cfg);
    }
    const Eigen::Index refresh = select_refresh_index(st.tau, w);
    st.tau(refresh) = psi(refresh);
    if ((st.tau - psi).cwiseAbs().maxCoeff() > p.c_e / 400.0) {
      ++out.e_invariant_failures;
    }
    Eigen::Index imin = 0;
    const double wmin = w.minCoeff(&imin);
    std::string action;
    if (wmin <= p.c_d || static_cast<double>(st.rows()) >= row_cap) {
      remove_cut(st, imin, w, p);
      action = "remove";
    } else {
      const SeparationResponse resp = oracle(st.x);
      ++out.oracle_calls;
      if (resp.inside) {
        out.kind = CpmOutcome::Kind::kFound;
        out.x = st.x;
        out.iterations = k;
        out.final_state = st;
        return out;
      }
      const double cn = resp.half.c.norm();
      const Vector a = -normalize_direction(resp.half.c);
      add_cut(st, a, p, RowTag{RowOrigin::kOracleCut, resp.half.label, out.oracle_calls - 1},
              std::max(resp.half.offset, 0.0) / cn);
      action = "add";
    }
    const CenteringReport rep = centering(st, p, p.centering_steps);
    if (rep.precondition_warning) ++out.precondition_warnings;
    if (trace) {
      TraceRecord rec;
      rec.k = k;
      rec.m = static_cast<long>(st.rows());
      rec.potential = potential(st, p);
      rec.min_slack = st.slack().minCoeff();
      rec.centrality = rep.delta_final;
      rec.action = action;
      rec.oracle_calls = out.oracle_calls;
      trace(rec);
    }
  }
}

}  // namespace cutplane
