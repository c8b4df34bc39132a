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

// JSON problem files for the command-line tool.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cutplane/corpus.hpp"
#include "cutplane/matroid.hpp"
#include "cutplane/sdp.hpp"
#include "cutplane/sfm.hpp"

namespace cutplane {

using Json = nlohmann::json;

// Parses text; syntax errors carry the parser's line and column.
inline Json parse_json(const std::string& text, const std::string& origin = "<input>") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    if (const auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    fail(ErrorCode::kInvalidInput, origin + ": " + msg);
  }
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::kInvalidInput, std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

template <typename T>
T get(const Json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidInput, std::string("bad \"") + what + "\": " + e.what());
  }
}

inline Vector vec(const Json& j, const char* what) {
  const auto v = get<std::vector<double>>(j, what);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

// A dense matrix, nested ([[..],..]) or flat row-major. A flat array is
// square unless cols says otherwise; cols = -2 demands the nested form.
inline Matrix json_matrix(const Json& j, const char* what, Eigen::Index cols = -1) {
  if (!j.is_array()) fail(ErrorCode::kInvalidInput, std::string(what) + " must be an array");
  if (!j.empty() && j.front().is_array()) {
    const auto rows = detail::get<std::vector<std::vector<double>>>(j, what);
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = static_cast<Eigen::Index>(rows.front().size());
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != c) {
        fail(ErrorCode::kInvalidInput, std::string(what) + ": ragged rows");
      }
      for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[i][k];
    }
    return m;
  }
  if (cols < -1) fail(ErrorCode::kInvalidInput, std::string(what) + " must be nested rows");
  const auto flat = detail::get<std::vector<double>>(j, what);
  Eigen::Index c = cols;
  if (c < 0) {
    c = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (static_cast<std::size_t>(c * c) != flat.size()) {
      fail(ErrorCode::kInvalidInput, std::string(what) + ": flat array is not square");
    }
  }
  if (c == 0 || flat.size() % static_cast<std::size_t>(c) != 0) {
    fail(ErrorCode::kInvalidInput, std::string(what) + ": bad flat size");
  }
  const Eigen::Index r = static_cast<Eigen::Index>(flat.size()) / c;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = flat[static_cast<std::size_t>(i * c + k)];
  }
  return m;
}

// {"type":"cut","edges":[[u,v,w],..],"n"?,"modular"?,"directed"?}
// {"type":"table","n":k,"values":[2^k numbers]}
// {"type":"coverage","sets":[[..],..],"weights":[..],"modular"?}
inline SubmodularFn load_function(const Json& j) {
  const auto type = detail::get<std::string>(detail::field(j, "type"), "type");
  std::vector<double> modular;
  if (j.contains("modular")) modular = detail::get<std::vector<double>>(j["modular"], "modular");
  if (type == "cut") {
    const auto raw = detail::get<std::vector<std::vector<double>>>(detail::field(j, "edges"), "edges");
    std::vector<WeightedEdge> edges;
    int n = j.contains("n") ? detail::get<int>(j["n"], "n") : 0;
    for (const auto& e : raw) {
      if (e.size() != 3) fail(ErrorCode::kInvalidInput, "edge must be [u, v, w]");
      const int u = static_cast<int>(e[0]), v = static_cast<int>(e[1]);
      if (u < 0 || v < 0 || u != e[0] || v != e[1]) {
        fail(ErrorCode::kInvalidInput, "edge endpoints must be nonnegative integers");
      }
      edges.push_back({u, v, e[2]});
      n = std::max(n, std::max(u, v) + 1);
    }
    n = std::max(n, static_cast<int>(modular.size()));
    if (!modular.empty() && static_cast<int>(modular.size()) != n) {
      fail(ErrorCode::kInvalidInput, "modular length differs from n");
    }
    const bool directed = j.contains("directed") && detail::get<bool>(j["directed"], "directed");
    return cut_function(n, edges, modular, directed);
  }
  if (type == "table") {
    const int n = detail::get<int>(detail::field(j, "n"), "n");
    return table_function(n, detail::get<std::vector<double>>(detail::field(j, "values"), "values"));
  }
  if (type == "coverage") {
    return coverage_function(
        detail::get<std::vector<std::vector<int>>>(detail::field(j, "sets"), "sets"),
        detail::get<std::vector<double>>(detail::field(j, "weights"), "weights"), modular);
  }
  fail(ErrorCode::kInvalidInput, "unknown function type \"" + type + "\"");
}

// {"type":"partition","blocks":[[..],..],"capacities":[..]}
// {"type":"uniform","rank":k,"n"?}
// {"type":"graphic","edges":[[u,v],..]}
// n_hint sizes a uniform matroid without an "n" field.
inline Matroid load_matroid(const Json& j, int n_hint = -1) {
  const auto type = detail::get<std::string>(detail::field(j, "type"), "type");
  if (type == "partition") {
    const auto blocks = detail::get<std::vector<std::vector<int>>>(detail::field(j, "blocks"), "blocks");
    const auto caps = detail::get<std::vector<int>>(detail::field(j, "capacities"), "capacities");
    int n = j.contains("n") ? detail::get<int>(j["n"], "n") : 0;
    for (const auto& b : blocks) {
      for (int e : b) n = std::max(n, e + 1);
    }
    return partition_matroid(n, blocks, caps);
  }
  if (type == "uniform") {
    const int k = detail::get<int>(detail::field(j, "rank"), "rank");
    const int n = j.contains("n") ? detail::get<int>(j["n"], "n") : n_hint;
    if (n < 0) fail(ErrorCode::kInvalidInput, "uniform matroid needs \"n\"");
    return uniform_matroid(n, k);
  }
  if (type == "graphic") {
    const auto raw = detail::get<std::vector<std::vector<int>>>(detail::field(j, "edges"), "edges");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : raw) {
      if (e.size() != 2) fail(ErrorCode::kInvalidInput, "edge must be [u, v]");
      edges.emplace_back(e[0], e[1]);
    }
    return graphic_matroid(edges);
  }
  fail(ErrorCode::kInvalidInput, "unknown matroid type \"" + type + "\"");
}

// {"C":..,"A":[..],"b":[..],"M"?}; matrices nested or flat row-major.
inline SdpProblem load_sdp(const Json& j) {
  Matrix C = json_matrix(detail::field(j, "C"), "C");
  std::vector<Matrix> A;
  const Json& ja = detail::field(j, "A");
  if (!ja.is_array()) fail(ErrorCode::kInvalidInput, "A must be an array of matrices");
  for (const auto& a : ja) A.push_back(json_matrix(a, "A", C.cols()));
  Vector b = detail::vec(detail::field(j, "b"), "b");
  std::optional<double> M;
  if (j.contains("M")) M = detail::get<double>(j["M"], "M");
  return make_sdp(std::move(C), std::move(A), std::move(b), M);
}

// {"type":"box","lo":[..],"hi":[..]} | {"type":"ball","center":[..],"radius":r}
// | {"type":"polytope","A":[[..],..],"b":[..]}; optional "R" (default 1)
// bounds the search box.
struct FeasibilitySpec {
  FeasibilityInstance instance;
  double R = 1.0;
};

inline FeasibilitySpec load_feasibility(const Json& j) {
  const auto type = detail::get<std::string>(detail::field(j, "type"), "type");
  FeasibilitySpec out;
  if (j.contains("R")) out.R = detail::get<double>(j["R"], "R");
  if (!(out.R > 0.0)) fail(ErrorCode::kInvalidInput, "R must be positive");
  FeasibilityInstance& f = out.instance;
  if (type == "box") {
    f.kind = FeasibilityInstance::Kind::kBox;
    f.lo = detail::vec(detail::field(j, "lo"), "lo");
    f.hi = detail::vec(detail::field(j, "hi"), "hi");
    if (f.lo.size() != f.hi.size()) fail(ErrorCode::kInvalidInput, "lo and hi differ in length");
    f.n = static_cast<int>(f.lo.size());
  } else if (type == "ball") {
    f.kind = FeasibilityInstance::Kind::kBall;
    f.center = detail::vec(detail::field(j, "center"), "center");
    f.radius = detail::get<double>(detail::field(j, "radius"), "radius");
    f.n = static_cast<int>(f.center.size());
  } else if (type == "polytope") {
    f.kind = FeasibilityInstance::Kind::kPolytope;
    f.b = detail::vec(detail::field(j, "b"), "b");
    f.A = json_matrix(detail::field(j, "A"), "A", -2);
    if (f.A.rows() != f.b.size()) fail(ErrorCode::kInvalidInput, "A and b differ in rows");
    f.n = static_cast<int>(f.A.cols());
  } else {
    fail(ErrorCode::kInvalidInput, "unknown feasibility type \"" + type + "\"");
  }
  if (f.n < 1) fail(ErrorCode::kInvalidInput, "empty dimension");
  return out;
}

// {"type":"affine_max","G":[[..],..],"h":[..]}: max_i (G x + h)_i
// {"type":"quadratic","Q":[[..],..],"c":[..]}: x^T Q x / 2 + c^T x, Q psd
// Optional "R" (default 1) is the box radius.
struct Objective {
  std::string type;
  Matrix Q;
  Vector c;
  AffineMax affine;
  double R = 1.0;

  int n() const { return type == "affine_max" ? affine.n() : static_cast<int>(c.size()); }
  double value(const Vector& x) const {
    return type == "affine_max" ? affine.value(x) : 0.5 * x.dot(Q * x) + c.dot(x);
  }
  Vector subgradient(const Vector& x) const {
    return type == "affine_max" ? affine.subgradient(x) : Vector(Q * x + c);
  }
};

inline Objective load_objective(const Json& j) {
  Objective o;
  o.type = detail::get<std::string>(detail::field(j, "type"), "type");
  if (j.contains("R")) o.R = detail::get<double>(j["R"], "R");
  if (!(o.R > 0.0)) fail(ErrorCode::kInvalidInput, "R must be positive");
  if (o.type == "affine_max") {
    o.affine.h = detail::vec(detail::field(j, "h"), "h");
    o.affine.G = json_matrix(detail::field(j, "G"), "G", -2);
    if (o.affine.G.rows() != o.affine.h.size()) fail(ErrorCode::kInvalidInput, "G and h differ");
  } else if (o.type == "quadratic") {
    o.c = detail::vec(detail::field(j, "c"), "c");
    o.Q = json_matrix(detail::field(j, "Q"), "Q");
    if (o.Q.rows() != o.c.size() || o.Q.cols() != o.c.size()) {
      fail(ErrorCode::kInvalidInput, "Q and c differ in size");
    }
  } else {
    fail(ErrorCode::kInvalidInput, "unknown objective type \"" + o.type + "\"");
  }
  if (o.n() < 1) fail(ErrorCode::kInvalidInput, "empty dimension");
  return o;
}

// Writers for generated instances, readable by the loaders above.
inline Json json_of(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Json json_of(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(json_of(Vector(m.row(i).transpose())));
  return rows;
}

inline Json json_of(const SfmInstance& in) {
  Json j;
  j["type"] = family_name(in.family);
  switch (in.family) {
    case SfmFamily::kCut: {
      j["n"] = in.n;
      Json edges = Json::array();
      for (const auto& e : in.edges) edges.push_back({e.u, e.v, e.w});
      j["edges"] = edges;
      j["directed"] = in.directed;
      j["modular"] = in.modular;
      break;
    }
    case SfmFamily::kCoverage:
      j["sets"] = in.sets;
      j["weights"] = in.weights;
      j["modular"] = in.modular;
      break;
    case SfmFamily::kTable:
      j["n"] = in.n;
      j["values"] = in.values;
      break;
  }
  return j;
}

inline Json json_of(const FeasibilityInstance& f, double R = 1.0) {
  Json j;
  j["R"] = R;
  switch (f.kind) {
    case FeasibilityInstance::Kind::kBox:
      j["type"] = "box";
      j["lo"] = json_of(f.lo);
      j["hi"] = json_of(f.hi);
      break;
    case FeasibilityInstance::Kind::kBall:
      j["type"] = "ball";
      j["center"] = json_of(f.center);
      j["radius"] = f.radius;
      break;
    case FeasibilityInstance::Kind::kPolytope:
    case FeasibilityInstance::Kind::kEmpty:
      j["type"] = "polytope";
      j["A"] = json_of(f.A);
      j["b"] = json_of(f.b);
      break;
  }
  return j;
}

inline Json json_of(const AffineMax& f, double R = 1.0) {
  return Json{{"type", "affine_max"}, {"G", json_of(f.G)}, {"h", json_of(f.h)}, {"R", R}};
}

inline Json json_of(const SdpProblem& p) {
  Json a = Json::array();
  for (const auto& m : p.A) a.push_back(json_of(m));
  return Json{{"C", json_of(p.C)}, {"A", a}, {"b", json_of(p.b)}, {"M", p.M}};
}

}  // namespace cutplane
