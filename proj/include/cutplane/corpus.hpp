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

// Random instance families shared by the bench harness and the tests.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cutplane/linalg.hpp"
#include "cutplane/matroid.hpp"
#include "cutplane/oracles.hpp"
#include "cutplane/rng.hpp"
#include "cutplane/sdp.hpp"
#include "cutplane/sfm.hpp"

namespace cutplane {

// f(x) = max_i (G x + h)_i with 2n + 1 Gaussian pieces.
struct AffineMax {
  Matrix G;
  Vector h;

  int n() const { return static_cast<int>(G.cols()); }
  double value(const Vector& x) const { return (G * x + h).maxCoeff(); }
  Vector subgradient(const Vector& x) const {
    Eigen::Index i = 0;
    (G * x + h).maxCoeff(&i);
    return G.row(i).transpose();
  }
};

inline AffineMax affine_max_instance(int n, std::uint64_t seed, int pieces = -1) {
  Rng rng(seed);
  const int k = pieces > 0 ? pieces : 2 * n + 1;
  AffineMax f;
  f.G.resize(k, n);
  f.h.resize(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n; ++j) f.G(i, j) = standard_normal(rng);
    f.h(i) = standard_normal(rng);
  }
  return f;
}

// Convex feasibility instances inside B_inf(1).
struct FeasibilityInstance {
  enum class Kind { kBox, kBall, kPolytope, kEmpty };
  Kind kind = Kind::kBox;
  int n = 0;
  Vector lo, hi;      // kBox
  Vector center;      // kBall, kPolytope (an interior point)
  double radius = 0;  // kBall
  Matrix A;           // kPolytope, kEmpty: A x <= b
  Vector b;

  bool feasible() const { return kind != Kind::kEmpty; }

  bool contains(const Vector& x, double tol = 1e-9) const {
    switch (kind) {
      case Kind::kBox:
        return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
      case Kind::kBall:
        return (x - center).norm() <= radius + tol;
      case Kind::kPolytope:
      case Kind::kEmpty:
        return ((A * x - b).array() <= tol).all();
    }
    return false;
  }

  SeparationOracle oracle() const {
    const FeasibilityInstance self = *this;
    return [self](const Vector& x) -> SeparationResponse {
      switch (self.kind) {
        case Kind::kBox:
          return box_separation(self.lo, self.hi)(x);
        case Kind::kBall: {
          const Vector d = x - self.center;
          const double dn = d.norm();
          if (dn <= self.radius) return SeparationResponse::Inside();
          return SeparationResponse::Cut(d / dn, self.radius - dn);
        }
        case Kind::kPolytope:
        case Kind::kEmpty: {
          Eigen::Index i = 0;
          const Vector viol = self.A * x - self.b;
          if (viol.maxCoeff(&i) <= 0.0) return SeparationResponse::Inside();
          return SeparationResponse::Cut(self.A.row(i).transpose(), -viol(i));
        }
      }
      return SeparationResponse::Inside();
    };
  }
};

inline std::string kind_name(FeasibilityInstance::Kind k) {
  switch (k) {
    case FeasibilityInstance::Kind::kBox: return "box";
    case FeasibilityInstance::Kind::kBall: return "ball";
    case FeasibilityInstance::Kind::kPolytope: return "polytope";
    case FeasibilityInstance::Kind::kEmpty: return "empty";
  }
  return "?";
}

inline FeasibilityInstance feasibility_instance(int n, FeasibilityInstance::Kind kind,
                                                std::uint64_t seed) {
  Rng rng(seed);
  FeasibilityInstance f;
  f.kind = kind;
  f.n = n;
  auto unif = [&](double a, double b) { return a + (b - a) * uniform01(rng); };
  switch (kind) {
    case FeasibilityInstance::Kind::kBox: {
      f.lo.resize(n);
      f.hi.resize(n);
      for (int i = 0; i < n; ++i) {
        const double w = unif(0.05, 0.5);
        f.lo(i) = unif(-0.9, 0.9 - w);
        f.hi(i) = f.lo(i) + w;
      }
      break;
    }
    case FeasibilityInstance::Kind::kBall: {
      f.radius = unif(0.05, 0.3);
      f.center.resize(n);
      for (int i = 0; i < n; ++i) f.center(i) = unif(-1.0 + f.radius, 1.0 - f.radius);
      break;
    }
    case FeasibilityInstance::Kind::kPolytope: {
      // 2n random halfspaces at distance r from an interior point.
      const int k = 2 * n;
      f.center.resize(n);
      for (int i = 0; i < n; ++i) f.center(i) = unif(-0.5, 0.5);
      f.A.resize(k, n);
      f.b.resize(k);
      for (int r = 0; r < k; ++r) {
        Vector a(n);
        for (int j = 0; j < n; ++j) a(j) = standard_normal(rng);
        a.normalize();
        f.A.row(r) = a.transpose();
        f.b(r) = a.dot(f.center) + unif(0.05, 0.3);
      }
      break;
    }
    case FeasibilityInstance::Kind::kEmpty: {
      // a^T x <= t and -a^T x <= -(t + gap).
      Vector a(n);
      for (int j = 0; j < n; ++j) a(j) = standard_normal(rng);
      a.normalize();
      const double t = unif(-0.3, 0.3);
      const double gap = unif(0.01, 0.2);
      f.A.resize(2, n);
      f.A.row(0) = a.transpose();
      f.A.row(1) = -a.transpose();
      f.b.resize(2);
      f.b << t, -(t + gap);
      break;
    }
  }
  return f;
}

// Submodular families: cut (plus modular), coverage (minus modular), and a
// table of concave-of-cardinality terms minus modular.
enum class SfmFamily { kCut, kCoverage, kTable };

inline std::string family_name(SfmFamily f) {
  switch (f) {
    case SfmFamily::kCut: return "cut";
    case SfmFamily::kCoverage: return "coverage";
    case SfmFamily::kTable: return "table";
  }
  return "?";
}

struct SfmInstance {
  SfmFamily family = SfmFamily::kCut;
  int n = 0;
  std::vector<WeightedEdge> edges;
  bool directed = false;
  std::vector<std::vector<int>> sets;
  std::vector<double> weights;
  std::vector<double> values;
  std::vector<double> modular;

  SubmodularFn function() const {
    switch (family) {
      case SfmFamily::kCut: return cut_function(n, edges, modular, directed);
      case SfmFamily::kCoverage: return coverage_function(sets, weights, modular);
      case SfmFamily::kTable: return table_function(n, values);
    }
    fail(ErrorCode::kInvalidInput, "family");
  }
};

inline SfmInstance sfm_instance(SfmFamily family, int n, std::uint64_t seed) {
  Rng rng(seed);
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  SfmInstance in;
  in.family = family;
  in.n = n;
  in.modular.assign(n, 0.0);
  switch (family) {
    case SfmFamily::kCut:
      in.directed = rng() % 2 == 1;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (rng() % 3 == 0) in.edges.push_back({i, j, static_cast<double>(pick(1, 9))});
        }
      }
      for (auto& m : in.modular) m = pick(-5, 9);
      break;
    case SfmFamily::kCoverage: {
      const int items = n + 3;
      in.sets.resize(n);
      for (auto& s : in.sets) {
        for (int t = 0; t < items; ++t) {
          if (rng() % 3 == 0) s.push_back(t);
        }
      }
      in.weights.resize(items);
      for (auto& w : in.weights) w = pick(1, 8);
      for (auto& m : in.modular) m = pick(0, 11);
      break;
    }
    case SfmFamily::kTable: {
      in.values.assign(std::size_t{1} << n, 0.0);
      for (int k = 0; k < 3; ++k) {
        const Mask a = rng() & full_mask(n);
        const int cap = pick(1, 3);
        const double w = pick(1, 9);
        for (Mask s = 0; s < in.values.size(); ++s) {
          in.values[s] += w * std::min(std::popcount(s & a), cap);
        }
      }
      for (auto& m : in.modular) m = pick(0, 9);
      for (Mask s = 0; s < in.values.size(); ++s) {
        for (int i = 0; i < n; ++i) {
          if (s >> i & 1) in.values[s] -= in.modular[i];
        }
      }
      in.modular.assign(n, 0.0);
      break;
    }
  }
  return in;
}

// Random SDP with A_1 = I/sqrt(m) and b from a trace-one psd point, so the
// primal is strictly feasible and the dual optimum is attained.
inline SdpProblem sdp_instance(int m, int n, std::uint64_t seed, double M = 4.0) {
  Rng rng(seed);
  auto sym = [&]() {
    Matrix g(m, m);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = standard_normal(rng);
    return Matrix(0.25 * (g + g.transpose()));
  };
  std::vector<Matrix> A{Matrix::Identity(m, m) / std::sqrt(static_cast<double>(m))};
  for (int i = 1; i < n; ++i) A.push_back(sym());
  Matrix g(m, m);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = standard_normal(rng);
  Matrix x0 = g * g.transpose();
  x0 /= x0.trace();
  Vector b(n);
  for (int i = 0; i < n; ++i) b(i) = A[i].cwiseProduct(x0).sum();
  return make_sdp(sym(), A, b, M);
}

// Matroid pairs for intersection tests.
enum class MatroidPairFamily { kPartitionPartition, kGraphicPartition, kUniformPartition };

inline std::string family_name(MatroidPairFamily f) {
  switch (f) {
    case MatroidPairFamily::kPartitionPartition: return "partition-partition";
    case MatroidPairFamily::kGraphicPartition: return "graphic-partition";
    case MatroidPairFamily::kUniformPartition: return "uniform-partition";
  }
  return "?";
}

struct MatroidPair {
  Matroid m1;
  Matroid m2;
  std::vector<long long> w;
};

inline Matroid random_partition(int n, Rng& rng) {
  const int nb = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, n / 2)));
  std::vector<std::vector<int>> blocks(nb);
  for (int e = 0; e < n; ++e) blocks[rng() % static_cast<std::uint64_t>(nb)].push_back(e);
  std::vector<int> caps(nb);
  for (int b = 0; b < nb; ++b) caps[b] = 1 + static_cast<int>(rng() % 2);
  return partition_matroid(n, blocks, caps);
}

inline MatroidPair matroid_pair(MatroidPairFamily family, int n, std::uint64_t seed,
                                long long wmax = 16) {
  Rng rng(seed);
  std::vector<long long> w(n);
  for (auto& x : w) x = static_cast<long long>(rng() % static_cast<std::uint64_t>(2 * wmax + 1)) - wmax / 2;
  for (auto& x : w) x = std::clamp(x, -wmax, wmax);
  switch (family) {
    case MatroidPairFamily::kPartitionPartition:
      return {random_partition(n, rng), random_partition(n, rng), w};
    case MatroidPairFamily::kGraphicPartition: {
      const int v = std::max(3, n / 2 + 1);
      std::vector<std::pair<int, int>> edges;
      for (int e = 0; e < n; ++e) {
        const int a = static_cast<int>(rng() % static_cast<std::uint64_t>(v));
        int b = static_cast<int>(rng() % static_cast<std::uint64_t>(v - 1));
        if (b >= a) ++b;
        edges.emplace_back(a, b);
      }
      return {graphic_matroid(edges), random_partition(n, rng), w};
    }
    case MatroidPairFamily::kUniformPartition: {
      const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, n - 1)));
      return {uniform_matroid(n, k), random_partition(n, rng), w};
    }
  }
  fail(ErrorCode::kInvalidInput, "family");
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::kInvalidInput, "need two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  if (sxx == 0.0) fail(ErrorCode::kInvalidInput, "need two distinct x");
  return sxy / sxx;
}

}  // namespace cutplane
