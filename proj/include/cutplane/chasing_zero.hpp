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
#include "cutplane/rng.hpp"

namespace cutplane {

// Smallest index attaining max |y_i|.
inline Eigen::Index player_pick(const Vector& y) {
  if (y.size() == 0) fail(ErrorCode::kEmptyVector, "player_pick on empty vector");
  Eigen::Index best = 0;
  double best_val = std::abs(y(0));
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    if (std::abs(y(i)) > best_val) {
      best_val = std::abs(y(i));
      best = i;
    }
  }
  return best;
}

// An adversary sees the true state x and produces the drift Delta and the
// observation noise (y = x + noise after the drift).
struct AdversaryDraw {
  Vector delta;
  Vector noise;
};
using Adversary = std::function<AdversaryDraw(const Vector& x, Rng& rng)>;

enum class AdversaryKind { kZero, kSparse, kDense, kAdaptive };

inline AdversaryKind parse_adversary(const std::string& name) {
  if (name == "zero") return AdversaryKind::kZero;
  if (name == "sparse") return AdversaryKind::kSparse;
  if (name == "dense") return AdversaryKind::kDense;
  if (name == "adaptive") return AdversaryKind::kAdaptive;
  fail(ErrorCode::kInvalidInput, "unknown adversary '" + name + "'");
}

inline Vector uniform_noise(Eigen::Index m, double R, Rng& rng) {
  Vector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = R * (2.0 * uniform01(rng) - 1.0);
  return v;
}

// Harness adversaries. Each drift is mean zero with l2 norm at most c.
inline Adversary make_adversary(AdversaryKind kind, double c, double R) {
  switch (kind) {
    case AdversaryKind::kZero:
      return [](const Vector& x, Rng&) {
        return AdversaryDraw{Vector::Zero(x.size()), Vector::Zero(x.size())};
      };
    case AdversaryKind::kSparse:
      return [c, R](const Vector& x, Rng& rng) {
        Vector d = Vector::Zero(x.size());
        const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(x.size()));
        d(i) = c * rademacher(rng);
        return AdversaryDraw{d, uniform_noise(x.size(), R, rng)};
      };
    case AdversaryKind::kDense:
      return [c, R](const Vector& x, Rng& rng) {
        const double scale = c / std::sqrt(static_cast<double>(x.size()));
        Vector d(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) d(i) = scale * rademacher(rng);
        return AdversaryDraw{d, uniform_noise(x.size(), R, rng)};
      };
    case AdversaryKind::kAdaptive:
      // Pushes the largest coordinate further and hides it behind noise that
      // shrinks its observed magnitude.
      return [c, R](const Vector& x, Rng& rng) {
        Eigen::Index top = 0;
        x.cwiseAbs().maxCoeff(&top);
        Vector d = Vector::Zero(x.size());
        d(top) = c * rademacher(rng);
        Vector noise = uniform_noise(x.size(), R, rng);
        const double after = x(top) + d(top);
        noise(top) = after > 0 ? -R : R;
        if (std::abs(after) < R) noise(top) = -after;
        return AdversaryDraw{d, noise};
      };
  }
  fail(ErrorCode::kInvalidInput, "adversary kind");
}

// Plays rounds of the game: x += Delta, observe y, zero the picked coordinate.
// Returns ||x||_inf after each round.
inline std::vector<double> simulate(const Adversary& adversary, Eigen::Index m,
                                    long rounds, double c, double R,
                                    std::uint64_t seed) {
  if (m < 1) fail(ErrorCode::kInvalidInput, "m must be positive");
  Rng rng(mix_seed(seed, 0x43484153ULL));
  Vector x = Vector::Zero(m);
  std::vector<double> traj;
  traj.reserve(static_cast<std::size_t>(rounds));
  for (long k = 0; k < rounds; ++k) {
    AdversaryDraw draw = adversary(x, rng);
    if (draw.delta.size() != m || draw.noise.size() != m) {
      fail(ErrorCode::kInvalidInput, "adversary returned wrong length");
    }
    if (draw.delta.norm() > c * (1.0 + 1e-12)) {
      fail(ErrorCode::kBudgetViolated, "drift exceeds c");
    }
    if (draw.noise.cwiseAbs().maxCoeff() > R * (1.0 + 1e-12)) {
      fail(ErrorCode::kBudgetViolated, "observation noise exceeds R");
    }
    x += draw.delta;
    const Vector y = x + draw.noise;
    x(player_pick(y)) = 0.0;
    traj.push_back(x.cwiseAbs().maxCoeff());
  }
  return traj;
}

// 2 (c + R) log(4 m k^2 / p), k counted from 1.
inline double chasing_envelope(Eigen::Index m, long k, double c, double R, double p) {
  const double kk = static_cast<double>(k);
  return 2.0 * (c + R) * std::log(4.0 * static_cast<double>(m) * kk * kk / p);
}

}  // namespace cutplane
