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
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cutplane/error.hpp"
#include "cutplane/linalg.hpp"
#include "cutplane/oracles.hpp"

namespace cutplane {

using ElementSet = std::vector<int>;  // sorted, 0-based

// A matroid on {0, ..., n-1} given by an independence oracle, a rank oracle,
// or both. Calls through either are counted.
class Matroid {
 public:
  using IndepFn = std::function<bool(const ElementSet&)>;
  using RankFn = std::function<int(const ElementSet&)>;

  Matroid(int n, IndepFn indep, RankFn rank = {})
      : n_(n), indep_(std::move(indep)), rank_(std::move(rank)),
        calls_(std::make_shared<long>(0)) {}

  int size() const { return n_; }
  bool has_independence() const { return static_cast<bool>(indep_); }
  bool has_rank() const { return static_cast<bool>(rank_); }

  bool independent(const ElementSet& s) const {
    ++*calls_;
    if (indep_) return indep_(s);
    return rank_(s) == static_cast<int>(s.size());
  }
  int rank(const ElementSet& s) const {
    if (!rank_) fail(ErrorCode::kInvalidInput, "matroid has no rank oracle");
    ++*calls_;
    return rank_(s);
  }
  long calls() const { return *calls_; }

 private:
  int n_;
  IndepFn indep_;
  RankFn rank_;
  std::shared_ptr<long> calls_;
};

inline Matroid free_matroid(int n) {
  return Matroid(n, [](const ElementSet&) { return true; },
                 [](const ElementSet& s) { return static_cast<int>(s.size()); });
}

inline Matroid uniform_matroid(int n, int k) {
  return Matroid(n, [k](const ElementSet& s) { return static_cast<int>(s.size()) <= k; },
                 [k](const ElementSet& s) { return std::min(static_cast<int>(s.size()), k); });
}

// Blocks must partition a subset of the ground set; elements outside every
// block are free.
inline Matroid partition_matroid(int n, std::vector<std::vector<int>> blocks,
                                 std::vector<int> capacities) {
  if (blocks.size() != capacities.size()) fail(ErrorCode::kInvalidInput, "blocks/capacities");
  std::vector<int> block_of(n, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (int e : blocks[b]) {
      if (e < 0 || e >= n || block_of[e] >= 0) {
        fail(ErrorCode::kInvalidInput, "partition blocks must be disjoint and in range");
      }
      block_of[e] = static_cast<int>(b);
    }
  }
  auto counts = [block_of, nb = blocks.size()](const ElementSet& s) {
    std::vector<int> c(nb, 0);
    int free = 0;
    for (int e : s) {
      if (block_of[e] < 0) ++free; else ++c[block_of[e]];
    }
    return std::make_pair(c, free);
  };
  return Matroid(
      n,
      [counts, capacities](const ElementSet& s) {
        const auto [c, free] = counts(s);
        (void)free;
        for (std::size_t b = 0; b < c.size(); ++b) {
          if (c[b] > capacities[b]) return false;
        }
        return true;
      },
      [counts, capacities](const ElementSet& s) {
        const auto [c, free] = counts(s);
        int r = free;
        for (std::size_t b = 0; b < c.size(); ++b) r += std::min(c[b], capacities[b]);
        return r;
      });
}

// Element i is edge i; a set is independent when it is a forest.
inline Matroid graphic_matroid(std::vector<std::pair<int, int>> edges) {
  int vertices = 0;
  for (const auto& [u, v] : edges) vertices = std::max({vertices, u + 1, v + 1});
  auto rank = [edges, vertices](const ElementSet& s) {
    std::vector<int> parent(vertices);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    int r = 0;
    for (int e : s) {
      const int a = find(edges[e].first);
      const int b = find(edges[e].second);
      if (a != b) {
        parent[a] = b;
        ++r;
      }
    }
    return r;
  };
  return Matroid(static_cast<int>(edges.size()),
                 [rank](const ElementSet& s) { return rank(s) == static_cast<int>(s.size()); },
                 rank);
}

namespace detail {

inline std::vector<int> greedy_order(const Vector& w) {
  std::vector<int> order;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w(a) > w(b); });
  return order;
}

inline ElementSet sorted_union(ElementSet s, int e) {
  s.insert(std::upper_bound(s.begin(), s.end(), e), e);
  return s;
}

}  // namespace detail

enum class GreedyMode { kIndependence, kRank };

// Maximum-weight independent set. Positive-weight elements are scanned in
// decreasing weight (ties by index). The rank variant locates each next
// addable element by binary search over the remaining order.
inline ElementSet matroid_greedy(const Matroid& m, const Vector& w,
                                 GreedyMode mode = GreedyMode::kIndependence) {
  if (w.size() != m.size()) fail(ErrorCode::kInvalidInput, "weight length");
  const std::vector<int> order = detail::greedy_order(w);
  ElementSet s;
  if (mode == GreedyMode::kIndependence) {
    if (!m.independent(s)) fail(ErrorCode::kOracleInconsistent, "empty set rejected");
    for (int e : order) {
      ElementSet t = detail::sorted_union(s, e);
      if (m.independent(t)) s = std::move(t);
    }
    if (!s.empty() && !m.independent(s)) {
      fail(ErrorCode::kOracleInconsistent, "accepted set later rejected");
    }
  } else {
    // rank(S + order[pos..j]) - |S| is monotone in j; the first j where it
    // exceeds rank(S) is the next element greedy would add.
    std::size_t pos = 0;
    int r = 0;
    while (pos < order.size()) {
      auto rank_with_prefix = [&](std::size_t j) {
        ElementSet t = s;
        for (std::size_t k = pos; k <= j; ++k) t = detail::sorted_union(t, order[k]);
        return m.rank(t);
      };
      if (rank_with_prefix(order.size() - 1) <= r) break;
      std::size_t lo = pos, hi = order.size() - 1;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (rank_with_prefix(mid) > r) hi = mid; else lo = mid + 1;
      }
      s = detail::sorted_union(s, order[lo]);
      ++r;
      pos = lo + 1;
    }
    if (m.rank(s) != static_cast<int>(s.size())) {
      fail(ErrorCode::kOracleInconsistent, "greedy set is dependent under rank oracle");
    }
  }
  return s;
}

inline Vector indicator(const ElementSet& s, int n) {
  Vector v = Vector::Zero(n);
  for (int e : s) v(e) = 1.0;
  return v;
}

inline double set_weight(const ElementSet& s, const Vector& w) {
  double total = 0.0;
  for (int e : s) total += w(e);
  return total;
}

// Greedy as an exact optimization oracle over the independent-set polytope.
inline OptOracle matroid_polytope_oracle(const Matroid& m,
                                         GreedyMode mode = GreedyMode::kIndependence) {
  return OptOracle([m, mode](const Vector& c) {
    return indicator(matroid_greedy(m, c, mode), m.size());
  });
}

}  // namespace cutplane
