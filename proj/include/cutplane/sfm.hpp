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
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cutplane/convex_opt.hpp"
#include "cutplane/cpm.hpp"
#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/matroid.hpp"
#include "cutplane/oracles.hpp"

namespace cutplane {

// Sets over at most 62 elements are packed into a bit mask.
using Mask = std::uint64_t;

inline constexpr int kMaxSfmElements = 62;

inline Mask to_mask(const ElementSet& s) {
  Mask m = 0;
  for (int i : s) m |= Mask{1} << i;
  return m;
}

inline ElementSet from_mask(Mask m, int n) {
  ElementSet s;
  for (int i = 0; i < n; ++i) {
    if (m >> i & 1) s.push_back(i);
  }
  return s;
}

inline Mask full_mask(int n) { return n == 0 ? 0 : (~Mask{0} >> (64 - n)); }

// Set function normalized so that f(empty) = 0. Underlying evaluations are
// memoized; eo_calls() counts cache misses and queries() counts requests.
class SubmodularFn {
 public:
  using Eval = std::function<double(const ElementSet&)>;

  SubmodularFn(int n, Eval eval, std::optional<double> M = std::nullopt)
      : n_(n), eval_(std::move(eval)), M_(M), state_(std::make_shared<State>()) {
    if (n < 0 || n > kMaxSfmElements) fail(ErrorCode::kInvalidInput, "ground set size out of range");
    state_->empty = eval_(ElementSet{});
    ++state_->eo;
    state_->cache[0] = 0.0;
  }

  int n() const { return n_; }
  Mask full() const { return full_mask(n_); }

  double operator()(Mask s) const {
    ++state_->queries;
    auto it = state_->cache.find(s);
    if (it != state_->cache.end()) return it->second;
    ++state_->eo;
    const double v = eval_(from_mask(s, n_)) - state_->empty;
    state_->cache.emplace(s, v);
    return v;
  }
  double operator()(const ElementSet& s) const { return (*this)(to_mask(s)); }

  // Value of the raw function on the empty set, removed by normalization.
  double raw_empty() const { return state_->empty; }

  bool has_bound() const { return M_.has_value(); }
  // Supplied bound, or max(sum_i f(i)^+, sum_i (f(V - i) - f(V))^+), which
  // bounds |f| for normalized submodular f: f(S) <= sum_{i in S} f(i), and
  // every marginal of i is at least f(V) - f(V - i).
  double M() const {
    if (M_) return *M_;
    const double fv = (*this)(full());
    double up = 0.0;
    double down = 0.0;
    for (int i = 0; i < n_; ++i) {
      up += std::max((*this)(Mask{1} << i), 0.0);
      down += std::max((*this)(full() & ~(Mask{1} << i)) - fv, 0.0);
    }
    return std::max({up, down, 1.0});
  }

  long eo_calls() const { return state_->eo; }
  long queries() const { return state_->queries; }

 private:
  struct State {
    double empty = 0.0;
    std::unordered_map<Mask, double> cache;
    long eo = 0;
    long queries = 0;
  };
  int n_;
  Eval eval_;
  std::optional<double> M_;
  std::shared_ptr<State> state_;
};

// Checks f(S+i) + f(S+j) >= f(S+i+j) + f(S) over all S and pairs i, j not in
// S. Returns a violating (S, i, j) if one exists.
struct SubmodularityViolation {
  Mask s = 0;
  int i = -1;
  int j = -1;
};

inline std::optional<SubmodularityViolation> check_submodular(const SubmodularFn& f,
                                                              double tol = 1e-9) {
  const int n = f.n();
  const Mask full = f.full();
  for (Mask s = 0;; ++s) {
    for (int i = 0; i < n; ++i) {
      if (s >> i & 1) continue;
      for (int j = i + 1; j < n; ++j) {
        if (s >> j & 1) continue;
        const Mask si = s | Mask{1} << i;
        const Mask sj = s | Mask{1} << j;
        if (f(si) + f(sj) < f(si | sj) + f(s) - tol) return SubmodularityViolation{s, i, j};
      }
    }
    if (s == full) break;
  }
  return std::nullopt;
}

inline SubmodularFn table_function(int n, std::vector<double> values,
                                   std::optional<double> M = std::nullopt) {
  if (n < 0 || n > 20) fail(ErrorCode::kInvalidInput, "table functions need n <= 20");
  if (values.size() != (std::size_t{1} << n)) {
    fail(ErrorCode::kInvalidInput, "table needs 2^n values");
  }
  auto table = std::make_shared<std::vector<double>>(std::move(values));
  const SubmodularFn::Eval eval = [table](const ElementSet& s) { return (*table)[to_mask(s)]; };
  // The check runs on its own instance so the returned counters start clean.
  if (n <= 12) {
    if (auto v = check_submodular(SubmodularFn(n, eval, M))) {
      fail(ErrorCode::kInvalidInput, "table is not submodular at S=" + std::to_string(v->s) +
                                         " i=" + std::to_string(v->i) +
                                         " j=" + std::to_string(v->j));
    }
  }
  return SubmodularFn(n, eval, M);
}

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double w = 0.0;
};

// Cut function plus an optional modular term: f(S) = w(delta(S)) - sum_{i in
// S} m_i. Directed cuts count u in S, v outside.
inline SubmodularFn cut_function(int n, std::vector<WeightedEdge> edges,
                                 std::vector<double> modular = {}, bool directed = false) {
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.w < 0) {
      fail(ErrorCode::kInvalidInput, "bad cut edge");
    }
  }
  if (!modular.empty() && static_cast<int>(modular.size()) != n) {
    fail(ErrorCode::kInvalidInput, "modular term has wrong length");
  }
  return SubmodularFn(n, [edges, modular, directed](const ElementSet& s) {
    const Mask m = to_mask(s);
    double v = 0.0;
    for (const auto& e : edges) {
      const bool in_u = m >> e.u & 1;
      const bool in_v = m >> e.v & 1;
      if (directed ? (in_u && !in_v) : (in_u != in_v)) v += e.w;
    }
    if (!modular.empty()) {
      for (int i : s) v -= modular[i];
    }
    return v;
  });
}

// f(S) = total weight of items covered by the sets indexed by S, minus an
// optional modular term.
inline SubmodularFn coverage_function(std::vector<std::vector<int>> sets,
                                      std::vector<double> weights,
                                      std::vector<double> modular = {}) {
  const int n = static_cast<int>(sets.size());
  for (const auto& s : sets) {
    for (int item : s) {
      if (item < 0 || item >= static_cast<int>(weights.size())) {
        fail(ErrorCode::kInvalidInput, "coverage item out of range");
      }
    }
  }
  if (!modular.empty() && static_cast<int>(modular.size()) != n) {
    fail(ErrorCode::kInvalidInput, "modular term has wrong length");
  }
  return SubmodularFn(n, [sets, weights, modular](const ElementSet& s) {
    std::vector<char> covered(weights.size(), 0);
    double v = 0.0;
    for (int i : s) {
      for (int item : sets[i]) {
        if (!covered[item]) {
          covered[item] = 1;
          v += weights[item];
        }
      }
      if (!modular.empty()) v -= modular[i];
    }
    return v;
  });
}

// Exhaustive minimum; ties go to the numerically smallest mask.
struct ExhaustiveMin {
  double value = 0.0;
  Mask set = 0;
  std::vector<Mask> minimizers;
};

inline ExhaustiveMin exhaustive_min(const SubmodularFn& f, double tol = 1e-9) {
  if (f.n() > 24) fail(ErrorCode::kInvalidInput, "exhaustive scan needs n <= 24");
  ExhaustiveMin out;
  out.value = f(Mask{0});
  const Mask full = f.full();
  for (Mask s = 1; s <= full && full != 0; ++s) {
    const double v = f(s);
    if (v < out.value) {
      out.value = v;
      out.set = s;
    }
  }
  for (Mask s = 0;; ++s) {
    if (f(s) <= out.value + tol) out.minimizers.push_back(s);
    if (s == full) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lovasz extension and base vertices.

struct Bfs {
  Vector h;
  std::vector<int> perm;
};

inline void check_unit_box(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= 0.0 && x(i) <= 1.0)) fail(ErrorCode::kOutOfBox, "point outside [0,1]^n");
  }
}

// Indices sorted by decreasing x, ties by increasing index.
inline std::vector<int> descending_order(const Vector& x) {
  std::vector<int> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return x(a) > x(b); });
  return perm;
}

inline double lovasz_eval(const SubmodularFn& f, const Vector& x) {
  if (x.size() != f.n()) fail(ErrorCode::kInvalidInput, "dimension mismatch");
  check_unit_box(x);
  const std::vector<int> perm = descending_order(x);
  double v = 0.0;
  Mask prefix = 0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    prefix |= Mask{1} << perm[k];
    const double next = k + 1 < perm.size() ? x(perm[k + 1]) : 0.0;
    v += f(prefix) * (x(perm[k]) - next);
  }
  return v;
}

inline Bfs bfs_from_order(const SubmodularFn& f, const std::vector<int>& perm) {
  const int n = f.n();
  if (static_cast<int>(perm.size()) != n) fail(ErrorCode::kInvalidInput, "not a permutation");
  Bfs out;
  out.h = Vector::Zero(n);
  out.perm = perm;
  Mask prefix = 0;
  double prev = 0.0;
  for (int v : perm) {
    if (v < 0 || v >= n || (prefix >> v & 1)) fail(ErrorCode::kInvalidInput, "not a permutation");
    prefix |= Mask{1} << v;
    const double cur = f(prefix);
    out.h(v) = cur - prev;
    prev = cur;
  }
  return out;
}

// Arcs (i, j) mean i in S implies j in S. Stored as a transitive closure.
class ArcSet {
 public:
  explicit ArcSet(int n = 0) : n_(n), reach_(static_cast<std::size_t>(n) * n, 0) {}

  int size() const { return n_; }

  bool reaches(int i, int j) const { return reach_[idx(i, j)] != 0; }

  void insert(int i, int j) {
    if (i == j || reaches(i, j)) return;
    std::vector<int> from{i}, to{j};
    for (int a = 0; a < n_; ++a) {
      if (reaches(a, i)) from.push_back(a);
      if (reaches(j, a)) to.push_back(a);
    }
    for (int a : from) {
      for (int b : to) {
        if (a != b) reach_[idx(a, b)] = 1;
      }
    }
  }

  // Descendants R(i) and ancestors Q(i), both including i.
  Mask R(int i) const {
    Mask m = Mask{1} << i;
    for (int j = 0; j < n_; ++j) {
      if (reaches(i, j)) m |= Mask{1} << j;
    }
    return m;
  }
  Mask Q(int i) const {
    Mask m = Mask{1} << i;
    for (int j = 0; j < n_; ++j) {
      if (reaches(j, i)) m |= Mask{1} << j;
    }
    return m;
  }

  bool acyclic() const {
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        if (reaches(i, j) && reaches(j, i)) return false;
      }
    }
    return true;
  }

  // Ring family membership: closed under descendants.
  bool contains(Mask s) const {
    for (int i = 0; i < n_; ++i) {
      if ((s >> i & 1) && (R(i) & ~s) != 0) return false;
    }
    return true;
  }

  ArcSet reversed() const {
    ArcSet r(n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) r.reach_[idx(j, i)] = reach_[idx(i, j)];
    }
    return r;
  }

  std::vector<std::pair<int, int>> pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (reaches(i, j)) out.emplace_back(i, j);
      }
    }
    return out;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
  int n_;
  std::vector<char> reach_;
};

// Decreasing x; equal values ordered so that for an arc (i, j) j comes
// first, then by index.
inline std::vector<int> consistent_order(const Vector& x, const ArcSet* arcs) {
  std::vector<int> perm = descending_order(x);
  if (arcs == nullptr || arcs->size() == 0) return perm;
  std::vector<int> out;
  out.reserve(perm.size());
  std::size_t a = 0;
  while (a < perm.size()) {
    std::size_t b = a;
    while (b < perm.size() && x(perm[b]) == x(perm[a])) ++b;
    std::vector<int> group(perm.begin() + a, perm.begin() + b);
    std::sort(group.begin(), group.end());
    std::vector<char> placed(group.size(), 0);
    for (std::size_t step = 0; step < group.size(); ++step) {
      std::size_t pick = group.size();
      for (std::size_t g = 0; g < group.size() && pick == group.size(); ++g) {
        if (placed[g]) continue;
        bool ready = true;
        for (std::size_t h = 0; h < group.size(); ++h) {
          if (!placed[h] && h != g && arcs->reaches(group[g], group[h])) ready = false;
        }
        if (ready) pick = g;
      }
      if (pick == group.size()) fail(ErrorCode::kInvalidInput, "arc set has a cycle");
      placed[pick] = 1;
      out.push_back(group[pick]);
    }
    a = b;
  }
  return out;
}

struct SeparatingHyperplane {
  Bfs bfs;
  double rhs = 0.0;  // f^(xbar) = h^T xbar
};

// The hyperplane h^T x <= f^(xbar) from the sort of xbar; valid for every x
// in the unit cube since h^T x <= f^(x) for base vertices h.
inline SeparatingHyperplane separation_hyperplane(const SubmodularFn& f, const Vector& xbar,
                                                  const ArcSet* arcs = nullptr) {
  check_unit_box(xbar);
  SeparatingHyperplane out;
  out.bfs = bfs_from_order(f, consistent_order(xbar, arcs));
  out.rhs = out.bfs.h.dot(xbar);
  return out;
}

// ---------------------------------------------------------------------------
// Ring family oracle.

enum class FacetKind { kLower, kUpper, kArc, kBfs };

// Facet g^T x <= r of the ring polytope or one of the BFS hyperplanes.
struct RingFacet {
  FacetKind kind = FacetKind::kBfs;
  int i = -1;
  int j = -1;
  Vector g;
  double r = 0.0;
  Bfs bfs;  // kBfs only
};

struct RingResponse {
  RingFacet facet;
  // Offset of the facet relative to the queried point: g^T z <= g^T xbar +
  // offset. Non-positive.
  double offset = 0.0;
};

// Violated x_i >= 0, then x_j <= 1, then x_i <= x_j for an arc (i, j), each
// at the lowest index; otherwise the hyperplane from an arc-consistent sort.
inline RingResponse ring_oracle(const SubmodularFn& f, const ArcSet& arcs, const Vector& xbar) {
  const int n = f.n();
  RingResponse out;
  RingFacet& fc = out.facet;
  for (int i = 0; i < n; ++i) {
    if (xbar(i) < 0.0) {
      fc.kind = FacetKind::kLower;
      fc.i = i;
      fc.g = -Vector::Unit(n, i);
      fc.r = 0.0;
      out.offset = xbar(i);
      return out;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (xbar(j) > 1.0) {
      fc.kind = FacetKind::kUpper;
      fc.j = j;
      fc.g = Vector::Unit(n, j);
      fc.r = 1.0;
      out.offset = 1.0 - xbar(j);
      return out;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (arcs.reaches(i, j) && xbar(i) > xbar(j)) {
        fc.kind = FacetKind::kArc;
        fc.i = i;
        fc.j = j;
        fc.g = Vector::Unit(n, i) - Vector::Unit(n, j);
        fc.r = 0.0;
        out.offset = xbar(j) - xbar(i);
        return out;
      }
    }
  }
  SeparatingHyperplane sh = separation_hyperplane(f, xbar, &arcs);
  fc.kind = FacetKind::kBfs;
  fc.g = sh.bfs.h;
  fc.r = sh.rhs;
  fc.bfs = std::move(sh.bfs);
  out.offset = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Deductions.

enum class Shortcut { kEmpty, kFull };

// For a point of B(f): nonnegative means the empty set is a minimizer,
// nonpositive means V is.
inline std::optional<Shortcut> degenerate_shortcut(const Vector& h) {
  if (h.size() == 0 || h.minCoeff() >= 0.0) return Shortcut::kEmpty;
  if (h.maxCoeff() <= 0.0) return Shortcut::kFull;
  return std::nullopt;
}

struct Bounds {
  Vector upper;
  Vector lower;
  double N = 0.0;
};

inline Bounds bounds_compute(const SubmodularFn& f, const ArcSet& arcs) {
  const int n = f.n();
  const Mask full = f.full();
  Bounds b;
  b.upper = Vector::Zero(n);
  b.lower = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Mask bit = Mask{1} << i;
    const Mask r = arcs.R(i);
    const Mask rest = full & ~arcs.Q(i);
    b.upper(i) = f(r) - f(r & ~bit);
    b.lower(i) = f(rest | bit) - f(rest);
    b.N = std::max({b.N, b.upper(i), -b.lower(i)});
  }
  return b;
}

inline void require_nondegenerate(const Vector& y) {
  if (y.size() == 0 || !(y.maxCoeff() > 0.0 && y.minCoeff() < 0.0)) {
    fail(ErrorCode::kDegenerateInput, "point has a single sign; use degenerate_shortcut");
  }
}

// Elements in every minimizer, from a point y of B(f).
inline ElementSet must_include(const Vector& y) {
  require_nondegenerate(y);
  const double n = static_cast<double>(y.size());
  const double thr = -(n - 1.0) * y.maxCoeff();
  ElementSet out;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < thr) out.push_back(static_cast<int>(i));
  }
  return out;
}

// Elements in no minimizer.
inline ElementSet must_exclude(const Vector& y) {
  require_nondegenerate(y);
  const double n = static_cast<double>(y.size());
  const double thr = -(n - 1.0) * y.minCoeff();
  ElementSet out;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) > thr) out.push_back(static_cast<int>(i));
  }
  return out;
}

struct SandwichPick {
  int p = 0;
  double combined_norm = 0.0;  // ||lam h + (1 - lam) h'||_inf
  double alpha = 0.0;
};

inline SandwichPick sandwich_pick(const Vector& h, const Vector& h2, double lam,
                                  std::optional<double> alpha = std::nullopt) {
  if (h.size() != h2.size() || h.size() == 0) fail(ErrorCode::kInvalidInput, "size mismatch");
  if (!(lam >= 0.0 && lam <= 1.0)) fail(ErrorCode::kInvalidInput, "lam outside [0,1]");
  const double a = alpha.value_or(1.0 / (2.0 * std::sqrt(static_cast<double>(h.size()))));
  const Vector mix = lam * h + (1.0 - lam) * h2;
  if (mix.norm() > a * std::min(lam * h.norm(), (1.0 - lam) * h2.norm())) {
    fail(ErrorCode::kPreconditionViolated, "vectors do not nearly cancel");
  }
  SandwichPick out;
  out.alpha = a;
  out.combined_norm = mix.cwiseAbs().maxCoeff();
  double best = -1.0;
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    const double v = std::max(lam * std::abs(h(j)), (1.0 - lam) * std::abs(h2(j)));
    if (v > best) {
      best = v;
      out.p = static_cast<int>(j);
    }
  }
  return out;
}

struct BfsTerm {
  double weight = 0.0;
  Bfs bfs;
};

enum class ArcDirection { kFromUpper, kFromLower };

namespace detail {

using MaskEval = std::function<double(Mask)>;

inline Vector bfs_vector(const MaskEval& f, int n, const std::vector<int>& perm) {
  Vector h = Vector::Zero(n);
  Mask prefix = 0;
  double prev = 0.0;
  for (int v : perm) {
    prefix |= Mask{1} << v;
    const double cur = f(prefix);
    h(v) = cur - prev;
    prev = cur;
  }
  return h;
}

// Pigeonhole step on a single term: move R(p) to the front of the term whose
// p-coordinate rises the most, and take the smallest coordinate outside R(p)
// of the resulting combination.
inline std::pair<int, int> deduce_from_upper(const MaskEval& f, int n, const ArcSet& arcs,
                                             const std::vector<BfsTerm>& terms, int p) {
  const Mask rp = arcs.R(p);
  const Mask outside = full_mask(n) & ~rp;
  if (outside == 0) fail(ErrorCode::kTriggerNotMet, "R(p) is the whole ground set");
  Vector y = Vector::Zero(n);
  for (const auto& t : terms) y += t.weight * t.bfs.h;
  const double ymax = y.maxCoeff();
  const double upper = f(rp) - f(rp & ~(Mask{1} << p));
  const double n4 = std::pow(static_cast<double>(n), 4);
  if (!(ymax > 0.0) || !(upper > n4 * ymax)) {
    fail(ErrorCode::kTriggerNotMet, "upper(p) does not dominate max y");
  }
  std::size_t l = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double rise = terms[k].weight * (upper - terms[k].bfs.h(p));
    if (rise > best) {
      best = rise;
      l = k;
    }
  }
  std::vector<int> perm;
  perm.reserve(n);
  for (int v : terms[l].bfs.perm) {
    if (rp >> v & 1) perm.push_back(v);
  }
  for (int v : terms[l].bfs.perm) {
    if (!(rp >> v & 1)) perm.push_back(v);
  }
  const Vector moved = bfs_vector(f, n, perm);
  const Vector y2 = y + terms[l].weight * (moved - terms[l].bfs.h);
  int q = -1;
  for (int v = 0; v < n; ++v) {
    if ((outside >> v & 1) && (q < 0 || y2(v) < y2(q))) q = v;
  }
  if (!(y2(q) < -static_cast<double>(n) * ymax)) {
    fail(ErrorCode::kTriggerNotMet, "moved combination is not negative enough");
  }
  return {p, q};
}

}  // namespace detail

// Returns an arc (p, q) for kFromUpper, or (q, p) for kFromLower, valid in
// the sense that a minimizer containing the tail also contains the head.
inline std::pair<int, int> deduce_arc(const SubmodularFn& f, const ArcSet& arcs,
                                      const std::vector<BfsTerm>& terms, int p,
                                      ArcDirection dir) {
  const int n = f.n();
  if (p < 0 || p >= n) fail(ErrorCode::kInvalidInput, "element out of range");
  if (terms.empty()) fail(ErrorCode::kInvalidInput, "empty decomposition");
  if (dir == ArcDirection::kFromUpper) {
    const detail::MaskEval eval = [&f](Mask s) { return f(s); };
    return detail::deduce_from_upper(eval, n, arcs, terms, p);
  }
  // g(S) = f(V \ S) - f(V): base vertices of g are negated f-vertices in the
  // reversed order, and arcs flip.
  const Mask full = f.full();
  const double fv = f(full);
  const detail::MaskEval g = [&f, full, fv](Mask s) { return f(full & ~s) - fv; };
  std::vector<BfsTerm> gterms;
  gterms.reserve(terms.size());
  for (const auto& t : terms) {
    BfsTerm gt;
    gt.weight = t.weight;
    gt.bfs.h = -t.bfs.h;
    gt.bfs.perm.assign(t.bfs.perm.rbegin(), t.bfs.perm.rend());
    gterms.push_back(std::move(gt));
  }
  const auto arc = detail::deduce_from_upper(g, n, arcs.reversed(), gterms, p);
  return {arc.second, arc.first};
}

// ---------------------------------------------------------------------------
// Reduced problems.

struct Fact {
  enum class Kind { kZero, kOne, kEqual, kArc };
  Kind kind = Kind::kZero;
  int i = -1;
  int j = -1;
};

// Restriction of f to the ring family given by arcs over groups of original
// elements, with every element of base forced in:
// value(S) = f(base + union of groups in S) - f(base).
struct ReducedProblem {
  const SubmodularFn* f = nullptr;
  std::vector<ElementSet> groups;
  Mask base = 0;
  ArcSet arcs;

  static ReducedProblem from(const SubmodularFn& fn) {
    ReducedProblem r;
    r.f = &fn;
    for (int i = 0; i < fn.n(); ++i) r.groups.push_back({i});
    r.arcs = ArcSet(fn.n());
    return r;
  }

  int size() const { return static_cast<int>(groups.size()); }

  Mask expand(Mask reduced) const {
    Mask m = base;
    for (int i = 0; i < size(); ++i) {
      if (reduced >> i & 1) m |= to_mask(groups[i]);
    }
    return m;
  }

  double offset() const { return (*f)(base); }
  double value(Mask reduced) const { return (*f)(expand(reduced)) - offset(); }

  // Index of the group holding original element e, or -1.
  int find(int e) const {
    for (int i = 0; i < size(); ++i) {
      if (std::binary_search(groups[i].begin(), groups[i].end(), e)) return i;
    }
    return -1;
  }

  SubmodularFn as_function() const {
    const ReducedProblem* self = this;
    return SubmodularFn(size(), [self](const ElementSet& s) { return self->value(to_mask(s)); });
  }
};

namespace detail {

// Keeps the groups in keep (a mask over reduced indices) and restricts arcs.
inline ReducedProblem restrict_to(const ReducedProblem& pr, Mask keep) {
  ReducedProblem out;
  out.f = pr.f;
  out.base = pr.base;
  std::vector<int> idx;
  for (int i = 0; i < pr.size(); ++i) {
    if (keep >> i & 1) {
      idx.push_back(i);
      out.groups.push_back(pr.groups[i]);
    }
  }
  out.arcs = ArcSet(static_cast<int>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      if (pr.arcs.reaches(idx[a], idx[b])) out.arcs.insert(static_cast<int>(a), static_cast<int>(b));
    }
  }
  return out;
}

// Merges every strongly connected class of the closure into one element.
inline ReducedProblem contract_cycles(const ReducedProblem& pr) {
  const int n = pr.size();
  std::vector<int> rep(n);
  for (int i = 0; i < n; ++i) {
    rep[i] = i;
    for (int j = 0; j < i; ++j) {
      if (pr.arcs.reaches(i, j) && pr.arcs.reaches(j, i)) {
        rep[i] = rep[j];
        break;
      }
    }
  }
  std::vector<int> slot(n, -1);
  ReducedProblem out;
  out.f = pr.f;
  out.base = pr.base;
  for (int i = 0; i < n; ++i) {
    if (rep[i] == i) {
      slot[i] = static_cast<int>(out.groups.size());
      out.groups.push_back(pr.groups[i]);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (rep[i] != i) {
      auto& g = out.groups[slot[rep[i]]];
      g.insert(g.end(), pr.groups[i].begin(), pr.groups[i].end());
      std::sort(g.begin(), g.end());
    }
  }
  out.arcs = ArcSet(static_cast<int>(out.groups.size()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int a = slot[rep[i]];
      const int b = slot[rep[j]];
      if (a != b && pr.arcs.reaches(i, j)) out.arcs.insert(a, b);
    }
  }
  return out;
}

}  // namespace detail

inline ReducedProblem consolidate(const ReducedProblem& pr, const Fact& fact) {
  const int n = pr.size();
  auto check = [n](int i) {
    if (i < 0 || i >= n) fail(ErrorCode::kInvalidInput, "fact refers to a missing element");
  };
  check(fact.i);
  switch (fact.kind) {
    case Fact::Kind::kZero:
      return detail::restrict_to(pr, full_mask(n) & ~pr.arcs.Q(fact.i));
    case Fact::Kind::kOne: {
      const Mask r = pr.arcs.R(fact.i);
      ReducedProblem out = detail::restrict_to(pr, full_mask(n) & ~r);
      out.base = pr.expand(r);
      return out;
    }
    case Fact::Kind::kEqual:
    case Fact::Kind::kArc: {
      check(fact.j);
      ReducedProblem out = pr;
      out.arcs.insert(fact.i, fact.j);
      if (fact.kind == Fact::Kind::kEqual) out.arcs.insert(fact.j, fact.i);
      return detail::contract_cycles(out);
    }
  }
  return pr;
}

// ---------------------------------------------------------------------------
// Weakly polynomial solver.

struct SfmResult {
  ElementSet set;
  double value = 0.0;
  long eo_calls = 0;
  long oracle_calls = 0;
  long cpm_runs = 0;
  long rounds = 0;
  std::vector<Fact> facts;  // in the indices of the problem they applied to
  std::string finish;       // how the last step concluded
};

struct SfmWeakSettings {
  Profile profile = Profile::kPractical;
  std::uint64_t seed = 0;
};

// Minimizes the extension over [0,1]^n through y = 2x - 1 in [-1,1]^n, then
// thresholds the best query at all level sets. With alpha = 1/(4M) the best
// query is within 1/2 of the minimum, and so is its best level set.
inline SfmResult sfm_weakly(const SubmodularFn& f, const SfmWeakSettings& s = {},
                            const TraceSink& trace = {}) {
  const int n = f.n();
  const long eo0 = f.eo_calls();
  SfmResult res;
  if (n == 0) {
    res.finish = "empty ground set";
    return res;
  }
  OptimizeSpec spec;
  spec.n = n;
  spec.R = 1.0;
  spec.alpha = 1.0 / (4.0 * f.M());
  spec.profile = s.profile;
  spec.seed = s.seed;
  spec.oracle = [&](const Vector& y) {
    const Vector x = ((y.array() + 1.0) * 0.5).cwiseMax(0.0).cwiseMin(1.0).matrix();
    const SeparatingHyperplane sh = separation_hyperplane(f, x);
    FunctionSepResponse r = subgrad_to_separation(y, 0.5 * sh.bfs.h, 2.0 * std::sqrt(n), 0.0);
    r.value = sh.rhs;
    return r;
  };
  const OptimizeResult opt = minimize(spec, trace);
  res.oracle_calls = opt.oracle_calls;
  res.cpm_runs = 1;
  const Vector x = ((opt.best_x.array() + 1.0) * 0.5).cwiseMax(0.0).cwiseMin(1.0).matrix();
  Mask best = 0;
  double best_val = 0.0;
  Mask prefix = 0;
  for (int v : descending_order(x)) {
    prefix |= Mask{1} << v;
    const double val = f(prefix);
    if (val < best_val) {
      best_val = val;
      best = prefix;
    }
  }
  res.set = from_mask(best, n);
  res.value = best_val;
  res.finish = opt.termination == OptimizeResult::Termination::kNearOptimalFlag
                   ? "zero subgradient"
                   : "width exhausted";
  res.eo_calls = f.eo_calls() - eo0;
  return res;
}

// ---------------------------------------------------------------------------
// Strongly polynomial driver.

// Nonnegative weights on the facets of the final polytope for both sides of
// a thin certificate: side 0 is the pivot, side 1 the rest.
struct HyperplaneCombination {
  struct Side {
    Vector alpha;
    Vector beta;
    std::map<std::pair<int, int>, double> gamma;
    std::vector<BfsTerm> lambda;
    Vector c;
    double M = 0.0;
  };
  Side side[2];
  double gap = 0.0;        // max(M + M', ||c + c'||_2, 0)
  double tolerance = 0.0;  // rounding allowance added to thresholds
  double reconstruction_error = 0.0;
  double lambda_total = 0.0;
};

// Translates the certificate rows back to facets g^T x <= r in [0,1]^n
// coordinates. Box rows carry labels k (x_k >= 0) and n + k (x_k <= 1);
// oracle rows carry an index into facets.
inline HyperplaneCombination combine_certificate(const ThinCertificate& cert,
                                                 const std::vector<RingFacet>& facets, int n) {
  HyperplaneCombination hc;
  for (auto& sd : hc.side) {
    sd.alpha = Vector::Zero(n);
    sd.beta = Vector::Zero(n);
    sd.c = Vector::Zero(n);
  }
  double scale = 0.0;
  for (Eigen::Index k = 0; k < cert.A.rows(); ++k) {
    const double t = k == cert.pivot ? 1.0 : cert.t(k);
    if (!(t > 0.0)) continue;
    auto& sd = hc.side[k == cert.pivot ? 0 : 1];
    const RowTag& tag = cert.tags[k];
    RingFacet box;
    const RingFacet* fc = nullptr;
    if (tag.origin == RowOrigin::kInitialBox) {
      const int lab = static_cast<int>(tag.label);
      if (lab < n) {
        box.kind = FacetKind::kLower;
        box.i = lab;
        box.g = -Vector::Unit(n, lab);
        box.r = 0.0;
      } else {
        box.kind = FacetKind::kUpper;
        box.j = lab - n;
        box.g = Vector::Unit(n, lab - n);
        box.r = 1.0;
      }
      fc = &box;
    } else {
      fc = &facets.at(static_cast<std::size_t>(tag.label));
    }
    const double w = t / fc->g.norm();
    sd.c += w * fc->g;
    sd.M += w * fc->r;
    scale += w * (fc->g.lpNorm<1>() + std::abs(fc->r));
    switch (fc->kind) {
      case FacetKind::kLower: sd.alpha(fc->i) += w; break;
      case FacetKind::kUpper: sd.beta(fc->j) += w; break;
      case FacetKind::kArc: sd.gamma[{fc->i, fc->j}] += w; break;
      case FacetKind::kBfs: sd.lambda.push_back({w, fc->bfs}); break;
    }
  }
  for (auto& sd : hc.side) {
    Vector rebuilt = -sd.alpha + sd.beta;
    for (const auto& [ij, w] : sd.gamma) {
      rebuilt(ij.first) += w;
      rebuilt(ij.second) -= w;
    }
    for (const auto& t : sd.lambda) {
      rebuilt += t.weight * t.bfs.h;
      hc.lambda_total += t.weight;
    }
    const double denom = std::max(sd.c.norm(), 1e-300);
    hc.reconstruction_error = std::max(hc.reconstruction_error, (sd.c - rebuilt).norm() / denom);
  }
  hc.gap = std::max({hc.side[0].M + hc.side[1].M, (hc.side[0].c + hc.side[1].c).norm(), 0.0});
  hc.tolerance = 1e-12 * scale;
  return hc;
}

// Facets whose weight exceeds 2 sqrt(n) gap are tight at every integral
// minimizer: x_i = 0, x_j = 1, or x_i = x_j.
inline std::vector<Fact> dimcut_facts(const HyperplaneCombination& hc, int n) {
  const double thr = 2.0 * std::sqrt(static_cast<double>(n)) * hc.gap + hc.tolerance;
  std::vector<Fact> out;
  for (int i = 0; i < n; ++i) {
    const double a = hc.side[0].alpha(i) + hc.side[1].alpha(i);
    if (a > thr) out.push_back({Fact::Kind::kZero, i, -1});
  }
  for (int j = 0; j < n; ++j) {
    const double b = hc.side[0].beta(j) + hc.side[1].beta(j);
    if (b > thr) out.push_back({Fact::Kind::kOne, j, -1});
  }
  std::map<std::pair<int, int>, double> g;
  for (const auto& sd : hc.side) {
    for (const auto& [ij, w] : sd.gamma) g[ij] += w;
  }
  for (const auto& [ij, w] : g) {
    if (w > thr) out.push_back({Fact::Kind::kEqual, ij.first, ij.second});
  }
  return out;
}

struct SfmStrongSettings {
  Profile profile = Profile::kPractical;
  std::uint64_t seed = 0;
  double eps_start = 0.1;
  double eps_shrink = 1e-2;
  double eps_floor = 1e-13;
};

namespace detail {

// Applies facts stated in the indices of pr, tracking elements by one of
// their original members.
inline ReducedProblem apply_facts(const ReducedProblem& pr, const std::vector<Fact>& facts) {
  std::vector<Fact> pinned;
  for (const Fact& f : facts) {
    Fact g = f;
    g.i = pr.groups[f.i].front();
    if (f.j >= 0) g.j = pr.groups[f.j].front();
    pinned.push_back(g);
  }
  ReducedProblem cur = pr;
  for (const Fact& g : pinned) {
    Fact h = g;
    h.i = cur.find(g.i);
    if (h.i < 0) continue;
    if (g.j >= 0) {
      h.j = cur.find(g.j);
      if (h.j < 0 || h.j == h.i) continue;
    }
    cur = consolidate(cur, h);
  }
  return cur;
}

}  // namespace detail

inline SfmResult sfm_strongly(const SubmodularFn& f, const SfmStrongSettings& s = {},
                              const TraceSink& trace = {}) {
  const int n0 = f.n();
  const long eo0 = f.eo_calls();
  SfmResult res;
  ReducedProblem pr = ReducedProblem::from(f);
  const long cap = static_cast<long>(n0) * n0 + n0;
  double eps = s.eps_start;
  auto finish = [&](Mask reduced, const std::string& how) {
    const Mask m = pr.expand(reduced);
    res.set = from_mask(m, n0);
    res.value = f(m);
    res.finish = how;
    res.eo_calls = f.eo_calls() - eo0;
    return res;
  };
  for (;;) {
    const int n = pr.size();
    if (n == 0) return finish(0, "ground set exhausted");
    if (res.rounds >= cap) fail(ErrorCode::kNoProgress, "round cap reached");
    const SubmodularFn g = pr.as_function();
    std::vector<RingFacet> facets;
    std::optional<Shortcut> shortcut;
    const SeparationOracle oracle = [&](const Vector& y) {
      const Vector x = (y.array() + 1.0) * 0.5;
      RingResponse rr = ring_oracle(g, pr.arcs, x);
      if (rr.facet.kind == FacetKind::kBfs) {
        shortcut = degenerate_shortcut(rr.facet.bfs.h);
        if (shortcut) return SeparationResponse::Inside();
      }
      const long label = static_cast<long>(facets.size());
      SeparationResponse out = SeparationResponse::Cut(rr.facet.g, 2.0 * rr.offset, label);
      facets.push_back(std::move(rr.facet));
      return out;
    };
    CpmParams p = make_params(s.profile, n, 1.0, eps);
    p.seed = mix_seed(s.seed, static_cast<std::uint64_t>(res.cpm_runs));
    const CpmOutcome out = run_feasibility(oracle, n, p, trace);
    ++res.cpm_runs;
    res.oracle_calls += out.oracle_calls;
    if (out.found()) {
      if (!shortcut) fail(ErrorCode::kOracleInconsistent, "ring oracle accepted a point");
      return finish(*shortcut == Shortcut::kEmpty ? 0 : full_mask(n),
                    *shortcut == Shortcut::kEmpty ? "nonnegative base vertex"
                                                  : "nonpositive base vertex");
    }
    const HyperplaneCombination hc = combine_certificate(*out.cert, facets, n);
    std::vector<Fact> facts = dimcut_facts(hc, n);
    if (facts.empty() && hc.side[0].lambda.size() + hc.side[1].lambda.size() > 0) {
      const double lam0 = [&] {
        double t = 0.0;
        for (const auto& x : hc.side[0].lambda) t += x.weight;
        return t;
      }();
      const double lam1 = hc.lambda_total - lam0;
      std::vector<BfsTerm> terms;
      Vector y[2] = {Vector::Zero(n), Vector::Zero(n)};
      for (int sd = 0; sd < 2; ++sd) {
        for (const auto& t : hc.side[sd].lambda) {
          terms.push_back({t.weight / hc.lambda_total, t.bfs});
          y[sd] += t.weight / hc.lambda_total * t.bfs.h;
        }
      }
      const Vector ybar = y[0] + y[1];
      if (auto sc = degenerate_shortcut(ybar)) {
        return finish(*sc == Shortcut::kEmpty ? 0 : full_mask(n),
                      "degenerate combined base point");
      }
      if (lam0 > 0.0 && lam1 > 0.0) {
        try {
          const double lam = lam0 / hc.lambda_total;
          const SandwichPick sp = sandwich_pick(y[0] / lam, y[1] / (1.0 - lam), lam);
          for (ArcDirection dir : {ArcDirection::kFromUpper, ArcDirection::kFromLower}) {
            try {
              const auto arc = deduce_arc(g, pr.arcs, terms, sp.p, dir);
              facts.push_back({Fact::Kind::kArc, arc.first, arc.second});
              break;
            } catch (const Error& e) {
              if (e.code() != ErrorCode::kTriggerNotMet) throw;
            }
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kPreconditionViolated) throw;
        }
      }
    }
    if (facts.empty()) {
      eps *= s.eps_shrink;
      if (eps < s.eps_floor) {
        fail(ErrorCode::kNoProgress,
             "no deduction at eps floor; gap=" + std::to_string(hc.gap) +
                 " lambda_total=" + std::to_string(hc.lambda_total) +
                 " rows=" + std::to_string(out.cert->A.rows()));
      }
      continue;
    }
    for (const Fact& fact : facts) res.facts.push_back(fact);
    pr = detail::apply_facts(pr, facts);
    ++res.rounds;
    eps = s.eps_start;
  }
}

}  // namespace cutplane
