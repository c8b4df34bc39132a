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

// cutplane: command-line front end.
//
// Exit codes: 0 solved, 2 infeasible or certificate outcome, 3 input error,
// 4 solver diagnostic.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cutplane/chasing_zero.hpp"
#include "cutplane/convex_opt.hpp"
#include "cutplane/corpus.hpp"
#include "cutplane/cpm.hpp"
#include "cutplane/ellipsoid.hpp"
#include "cutplane/intersect.hpp"
#include "cutplane/io.hpp"
#include "cutplane/matroid.hpp"
#include "cutplane/sdp.hpp"
#include "cutplane/sfm.hpp"

namespace fs = std::filesystem;
using namespace cutplane;

namespace {

constexpr int kSolved = 0;
constexpr int kCertificate = 2;
constexpr int kInputError = 3;
constexpr int kDiagnostic = 4;

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string profile = "practical";
  std::string trace;
  std::string format = "json";
  std::string spec;

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("CUTPLANE_SEED"); env && *env) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (*end != '\0') fail(ErrorCode::kInvalidInput, "CUTPLANE_SEED is not an integer");
      return v;
    }
    return 0;
  }
  Profile resolved_profile() const {
    return profile == "theoretical" ? Profile::kTheoretical : Profile::kPractical;
  }
};

void add_common(CLI::App* sub, RunConfig& cfg, bool with_spec = true) {
  if (with_spec) sub->add_option("--spec", cfg.spec, "problem file (JSON)")->required();
  sub->add_option("--seed", cfg.seed, "random seed (default: $CUTPLANE_SEED, then 0)");
  sub->add_option("--profile", cfg.profile, "cutting-plane constants")
      ->check(CLI::IsMember({"theoretical", "practical"}));
  sub->add_option("--trace", cfg.trace, "write per-iteration JSONL here");
  sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "text"}));
}

// Opens the trace file on demand; the sink is empty without --trace.
class TraceFile {
 public:
  explicit TraceFile(const std::string& path) {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) fail(ErrorCode::kInvalidInput, "cannot open trace file " + path);
  }
  TraceSink sink() {
    if (!out_.is_open()) return {};
    return [this](const TraceRecord& r) {
      const Json j{{"k", r.k},
                   {"m", r.m},
                   {"potential", r.potential},
                   {"min_slack", r.min_slack},
                   {"centrality", r.centrality},
                   {"action", r.action},
                   {"oracle_calls", r.oracle_calls}};
      out_ << j.dump() << '\n';
    };
  }

 private:
  std::ofstream out_;
};

// Integral values print without a fractional part.
Json number(double v) {
  if (std::isfinite(v) && std::abs(v) < 1e15 && v == std::floor(v)) {
    return static_cast<long long>(v);
  }
  return v;
}

void emit(const Json& result, const RunConfig& cfg) {
  if (cfg.format == "text") {
    for (const auto& [key, value] : result.items()) {
      std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
                << '\n';
    }
  } else {
    std::cout << result.dump() << '\n';
  }
}

int code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kOutOfBox:
    case ErrorCode::kDegenerateInput:
    case ErrorCode::kNotUnitVector:
    case ErrorCode::kEmptyVector:
      return kInputError;
    default:
      return kDiagnostic;
  }
}

// ---------------------------------------------------------------------------

int run_feas(const RunConfig& cfg, double eps) {
  const FeasibilitySpec spec = load_feasibility(load_json(cfg.spec));
  TraceFile trace(cfg.trace);
  const int n = spec.instance.n;
  CpmParams p = make_params(cfg.resolved_profile(), n, spec.R, eps);
  p.seed = cfg.resolved_seed();
  const CpmOutcome out = run_feasibility(spec.instance.oracle(), n, p, trace.sink());
  Json res;
  res["oracle_calls"] = out.oracle_calls;
  res["iterations"] = out.iterations;
  if (out.found()) {
    res["status"] = "found";
    res["x"] = json_of(out.x);
    emit(res, cfg);
    return kSolved;
  }
  const ThinCertificate& c = *out.cert;
  res["status"] = "thin";
  res["eps"] = eps;
  res["certificate"] = Json{{"pivot", c.pivot},
                            {"pivot_slack", c.pivot_slack},
                            {"residual", c.residual},
                            {"residual_bound", c.residual_bound},
                            {"slack_combination", c.slack_combination},
                            {"slack_bound", c.slack_bound},
                            {"t", json_of(c.t)}};
  emit(res, cfg);
  return kCertificate;
}

int run_opt(const RunConfig& cfg, double alpha) {
  const Objective obj = load_objective(load_json(cfg.spec));
  TraceFile trace(cfg.trace);
  const int n = obj.n();
  OptimizeSpec spec;
  spec.n = n;
  spec.R = obj.R;
  spec.alpha = alpha;
  spec.profile = cfg.resolved_profile();
  spec.seed = cfg.resolved_seed();
  spec.oracle = subgradient_oracle([&](const Vector& x) { return obj.value(x); },
                                   [&](const Vector& x) { return obj.subgradient(x); },
                                   2.0 * obj.R * std::sqrt(static_cast<double>(n)));
  const OptimizeResult r = minimize(spec, trace.sink());
  emit(Json{{"x", json_of(r.best_x)},
            {"value", r.best_value},
            {"oracle_calls", r.oracle_calls},
            {"iterations", r.iterations},
            {"termination", r.termination == OptimizeResult::Termination::kNearOptimalFlag
                                ? "near_optimal"
                                : "width_exhausted"}},
       cfg);
  return kSolved;
}

int run_sfm(const RunConfig& cfg, const std::string& mode) {
  const SubmodularFn f = load_function(load_json(cfg.spec));
  TraceFile trace(cfg.trace);
  SfmResult r;
  if (mode == "weak") {
    r = sfm_weakly(f, {cfg.resolved_profile(), cfg.resolved_seed()}, trace.sink());
  } else {
    SfmStrongSettings s;
    s.profile = cfg.resolved_profile();
    s.seed = cfg.resolved_seed();
    r = sfm_strongly(f, s, trace.sink());
  }
  emit(Json{{"min_value", number(r.value)}, {"set", r.set}}, cfg);
  return kSolved;
}

// {"matroid": {...}, "weights": [...]} or a matroid object with "weights".
int run_matroid(const RunConfig& cfg, const std::string& oracle) {
  const Json j = load_json(cfg.spec);
  const Json& mj = j.contains("matroid") ? j.at("matroid") : j;
  if (!j.contains("weights")) fail(ErrorCode::kInvalidInput, "missing field \"weights\"");
  const Vector w = detail::vec(j.at("weights"), "weights");
  const Matroid m = load_matroid(mj, static_cast<int>(w.size()));
  if (m.size() != w.size()) fail(ErrorCode::kInvalidInput, "weights length differs from ground set");
  const ElementSet s =
      matroid_greedy(m, w, oracle == "rank" ? GreedyMode::kRank : GreedyMode::kIndependence);
  emit(Json{{"set", s}, {"weight", number(set_weight(s, w))}, {"oracle_calls", m.calls()}}, cfg);
  return kSolved;
}

int run_intersect(const RunConfig& cfg) {
  const Json j = load_json(cfg.spec);
  const Json& wj = detail::field(j, "weights");
  if (!wj.is_array()) fail(ErrorCode::kInvalidInput, "weights must be an array");
  std::vector<long long> w;
  for (const auto& v : wj) {
    if (!v.is_number_integer()) fail(ErrorCode::kInvalidInput, "weights must be integers");
    w.push_back(v.get<long long>());
  }
  const int n = static_cast<int>(w.size());
  const Matroid m1 = load_matroid(detail::field(j, "m1"), n);
  const Matroid m2 = load_matroid(detail::field(j, "m2"), n);
  if (m1.size() != n || m2.size() != n) {
    fail(ErrorCode::kInvalidInput, "matroid ground sets differ from weights length");
  }
  long long M = 1;
  for (long long v : w) M = std::max(M, std::llabs(v));
  const MatroidIntersectionResult r = matroid_intersection(m1, m2, w, M, cfg.resolved_seed());
  emit(Json{{"set", r.set},
            {"weight", number(r.weight)},
            {"route", r.route == MatroidIntersectionResult::Route::kRoundedWitness ? "rounded_witness"
                                                                                 : "queried_pair"},
            {"attempts", r.attempts},
            {"oracle_calls", r.oracle_calls}},
       cfg);
  return kSolved;
}

int run_sdp(const RunConfig& cfg, double eps, bool primal, const std::string& backend) {
  const SdpProblem p = load_sdp(load_json(cfg.spec));
  TraceFile trace(cfg.trace);
  SdpSettings s;
  s.backend = backend == "dense" ? EigenBackend::kDense : EigenBackend::kRepeatedSquaring;
  s.seed = cfg.resolved_seed();
  s.profile = cfg.resolved_profile();
  const DualResult d = solve_dual(p, eps, s, trace.sink());
  Json res{{"y", json_of(d.y)},
           {"dual_value", d.objective},
           {"penalized_value", d.value},
           {"lambda_max", d.lambda_max},
           {"oracle_calls", d.oracle_calls},
           {"witnesses", d.witnesses.size()}};
  if (primal) {
    const PrimalResult pr = recover_primal(p, d.witnesses, eps, s);
    res["primal"] = Json{{"X", json_of(pr.X)},
                         {"objective", pr.objective},
                         {"residual", pr.residual},
                         {"oracle_calls", pr.oracle_calls}};
  }
  emit(res, cfg);
  return kSolved;
}

struct ChaseArgs {
  long m = 64;
  long rounds = 1000;
  double c = 1.0;
  double R = 1.0;
  std::string adversary = "dense";
};

int run_chase(const RunConfig& cfg, const ChaseArgs& a) {
  if (a.m < 1 || a.rounds < 0 || !(a.c >= 0.0) || !(a.R >= 0.0)) {
    fail(ErrorCode::kInvalidInput, "chase needs m >= 1, rounds >= 0, c >= 0, R >= 0");
  }
  const std::vector<double> traj =
      simulate(make_adversary(parse_adversary(a.adversary), a.c, a.R), a.m, a.rounds, a.c, a.R,
               cfg.resolved_seed());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::cout << Json{{"k", k + 1}, {"supnorm", traj[k]}}.dump() << '\n';
  }
  return kSolved;
}

// ---------------------------------------------------------------------------
// Benchmark harness.

struct BenchArgs {
  std::string corpus;
  std::string out;
  std::string generate;
  std::vector<int> sizes{2, 4, 8};
  int count = 3;
  double feas_eps = 1e-3;
  double opt_alpha = 0.01;
  double sdp_eps = 1e-2;
};

struct BenchRow {
  std::string instance;
  std::string kind;
  int n = 0;
  long calls = 0;
  double wall_ms = 0.0;
  std::string verdict;
  std::optional<long> baseline;
};

std::string infer_kind(const Json& j) {
  if (j.contains("m1")) return "intersect";
  if (j.contains("C")) return "sdp";
  const std::string t = j.value("type", "");
  if (t == "cut" || t == "table" || t == "coverage") return "sfm";
  if (t == "box" || t == "ball" || t == "polytope") return "feas";
  if (t == "affine_max" || t == "quadratic") return "opt";
  return "";
}

void generate_corpus(const BenchArgs& a, std::uint64_t seed) {
  fs::create_directories(a.corpus);
  auto write = [&](const std::string& name, const Json& j) {
    std::ofstream(fs::path(a.corpus) / name) << j.dump(1) << '\n';
  };
  for (int n : a.sizes) {
    if (n < 1) fail(ErrorCode::kInvalidInput, "sizes must be positive");
    for (int i = 0; i < a.count; ++i) {
      const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(n) * 1000 + i);
      char name[64];
      std::snprintf(name, sizeof name, "%s_n%03d_%02d.json", a.generate.c_str(), n, i);
      if (a.generate == "sfm") {
        if (n > 20) fail(ErrorCode::kInvalidInput, "sfm sizes must be at most 20");
        write(name, json_of(sfm_instance(static_cast<SfmFamily>(i % 3), n, s)));
      } else if (a.generate == "feas") {
        write(name, json_of(feasibility_instance(n, static_cast<FeasibilityInstance::Kind>(i % 4), s)));
      } else if (a.generate == "opt") {
        write(name, json_of(affine_max_instance(n, s)));
      } else if (a.generate == "sdp") {
        write(name, json_of(sdp_instance(3, n, s)));
      } else {
        fail(ErrorCode::kInvalidInput, "unknown corpus family \"" + a.generate + "\"");
      }
    }
  }
}

BenchRow bench_one(const fs::path& file, const BenchArgs& a, const RunConfig& cfg) {
  BenchRow row;
  row.instance = file.filename().string();
  const Json j = load_json(file.string());
  row.kind = infer_kind(j);
  const std::uint64_t seed = cfg.resolved_seed();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (row.kind == "sfm") {
      const SubmodularFn f = load_function(j);
      row.n = f.n();
      const SfmResult r = sfm_weakly(f, {cfg.resolved_profile(), seed});
      row.calls = r.eo_calls;
      if (row.n <= 16) {
        const SubmodularFn g = load_function(j);
        const ExhaustiveMin e = exhaustive_min(g);
        row.baseline = g.eo_calls();
        row.verdict = std::abs(e.value - r.value) <= 1e-9 ? "match" : "mismatch";
      } else {
        row.verdict = "solved";
      }
    } else if (row.kind == "feas") {
      const FeasibilitySpec s = load_feasibility(j);
      row.n = s.instance.n;
      CpmParams p = make_params(cfg.resolved_profile(), row.n, s.R, a.feas_eps);
      p.seed = seed;
      const CpmOutcome out = run_feasibility(s.instance.oracle(), row.n, p);
      row.calls = out.oracle_calls;
      const EllipsoidResult e = ellipsoid_baseline(s.instance.oracle(), row.n, s.R, a.feas_eps,
                                                   EllipsoidStop::kMeanRadius);
      row.baseline = e.oracle_calls;
      row.verdict = out.found() ? "found" : "thin";
      if (out.found() != e.found) row.verdict += "/ellipsoid-disagrees";
    } else if (row.kind == "opt") {
      const Objective obj = load_objective(j);
      row.n = obj.n();
      OptimizeSpec spec;
      spec.n = row.n;
      spec.R = obj.R;
      spec.alpha = a.opt_alpha;
      spec.profile = cfg.resolved_profile();
      spec.seed = seed;
      auto f = [&](const Vector& x) { return obj.value(x); };
      auto g = [&](const Vector& x) { return obj.subgradient(x); };
      spec.oracle = subgradient_oracle(f, g, 2.0 * obj.R * std::sqrt(static_cast<double>(row.n)));
      const OptimizeResult r = minimize(spec);
      row.calls = r.oracle_calls;
      const EllipsoidMinResult e = ellipsoid_minimize(f, g, row.n, obj.R, r.eps);
      row.baseline = e.oracle_calls;
      row.verdict = r.termination == OptimizeResult::Termination::kNearOptimalFlag
                        ? "near_optimal"
                        : "width_exhausted";
    } else if (row.kind == "sdp") {
      const SdpProblem p = load_sdp(j);
      row.n = p.n();
      SdpSettings s;
      s.seed = seed;
      s.profile = cfg.resolved_profile();
      row.calls = solve_dual(p, a.sdp_eps, s).oracle_calls;
      row.verdict = "solved";
    } else if (row.kind == "intersect") {
      std::vector<long long> w = detail::get<std::vector<long long>>(j.at("weights"), "weights");
      row.n = static_cast<int>(w.size());
      const Matroid m1 = load_matroid(j.at("m1"), row.n);
      const Matroid m2 = load_matroid(j.at("m2"), row.n);
      long long M = 1;
      for (long long v : w) M = std::max(M, std::llabs(v));
      row.calls = matroid_intersection(m1, m2, w, M, seed).oracle_calls;
      row.verdict = "solved";
    } else {
      row.verdict = "skipped";
    }
  } catch (const Error& e) {
    row.verdict = "error:" + std::string(error_name(e.code()));
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int run_bench(const RunConfig& cfg, const BenchArgs& a) {
  if (!a.generate.empty()) generate_corpus(a, cfg.resolved_seed());
  if (!fs::is_directory(a.corpus)) fail(ErrorCode::kInvalidInput, "no corpus directory " + a.corpus);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.corpus)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ofstream csv(a.out);
  if (!csv) fail(ErrorCode::kInvalidInput, "cannot write " + a.out);
  csv << "instance,n,oracle_calls,wall_ms,verdict,baseline_calls,call_ratio\n";
  std::map<std::string, std::map<int, std::vector<std::pair<double, double>>>> by_kind;
  Json rows = Json::array();
  for (const auto& f : files) {
    const BenchRow r = bench_one(f, a, cfg);
    csv << r.instance << ',' << r.n << ',' << r.calls << ',' << r.wall_ms << ',' << r.verdict
        << ',';
    if (r.baseline) csv << *r.baseline << ',' << static_cast<double>(r.calls) / *r.baseline;
    else csv << ',';
    csv << '\n';
    rows.push_back(Json{{"instance", r.instance}, {"kind", r.kind}, {"verdict", r.verdict}});
    if (r.calls > 0 && r.n > 0 && r.verdict.rfind("error", 0) != 0) {
      by_kind[r.kind][r.n].emplace_back(static_cast<double>(r.calls),
                                        r.baseline ? static_cast<double>(*r.baseline) : 0.0);
    }
  }
  // Slopes of log mean calls against log n, per family.
  Json fits = Json::object();
  for (const auto& [kind, sizes] : by_kind) {
    std::vector<double> ns, calls, base;
    bool have_base = true;
    for (const auto& [n, v] : sizes) {
      double c = 0, b = 0;
      for (const auto& [ci, bi] : v) {
        c += ci;
        b += bi;
      }
      ns.push_back(n);
      calls.push_back(c / v.size());
      base.push_back(b / v.size());
      have_base = have_base && b > 0;
    }
    Json fit{{"sizes", ns.size()}};
    if (ns.size() >= 2) {
      fit["calls_slope"] = loglog_slope(ns, calls);
      if (have_base) fit["baseline_slope"] = loglog_slope(ns, base);
    }
    fits[kind] = fit;
  }
  emit(Json{{"instances", files.size()}, {"fits", fits}, {"rows", rows}}, cfg);
  return kSolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cutplane: cutting-plane solvers"};
  app.require_subcommand(1);
  RunConfig cfg;

  double feas_eps = 1e-4;
  auto* feas = app.add_subcommand("feas", "convex feasibility from a separation oracle");
  add_common(feas, cfg);
  feas->add_option("--eps", feas_eps, "target width")->check(CLI::PositiveNumber);

  double alpha = 1e-3;
  auto* opt = app.add_subcommand("opt", "convex minimization over a box");
  add_common(opt, cfg);
  opt->add_option("--alpha", alpha, "relative accuracy")->check(CLI::Range(1e-12, 0.999));

  std::string mode = "weak";
  auto* sfm = app.add_subcommand("sfm", "submodular function minimization");
  add_common(sfm, cfg);
  sfm->add_option("--mode", mode, "solver")->check(CLI::IsMember({"weak", "strong"}));

  std::string moracle = "independence";
  auto* mat = app.add_subcommand("matroid", "maximum-weight independent set by greedy");
  add_common(mat, cfg);
  mat->add_option("--oracle", moracle, "oracle used")->check(CLI::IsMember({"independence", "rank"}));

  auto* inter = app.add_subcommand("intersect", "maximum-weight common independent set");
  add_common(inter, cfg);

  double sdp_eps = 1e-3;
  bool primal = false;
  std::string backend = "squaring";
  auto* sdp = app.add_subcommand("sdp", "dual semidefinite program");
  add_common(sdp, cfg);
  sdp->add_option("--eps", sdp_eps, "accuracy")->check(CLI::PositiveNumber);
  sdp->add_flag("--primal", primal, "also recover a primal matrix");
  sdp->add_option("--backend", backend, "eigenvector routine")
      ->check(CLI::IsMember({"squaring", "dense"}));

  ChaseArgs chase_args;
  auto* chase = app.add_subcommand("chase", "chasing-zero game, JSONL per round");
  add_common(chase, cfg, false);
  chase->add_option("--m", chase_args.m, "coordinates");
  chase->add_option("--rounds", chase_args.rounds, "rounds");
  chase->add_option("--c", chase_args.c, "drift budget");
  chase->add_option("--R", chase_args.R, "noise budget");
  chase->add_option("--adversary", chase_args.adversary, "adversary")
      ->check(CLI::IsMember({"zero", "sparse", "dense", "adaptive"}));

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "run a corpus and write a CSV");
  add_common(bench, cfg, false);
  bench->add_option("--corpus", bench_args.corpus, "directory of JSON instances")->required();
  bench->add_option("--out", bench_args.out, "CSV output path")->required();
  bench->add_option("--generate", bench_args.generate, "first write a corpus of this family")
      ->check(CLI::IsMember({"sfm", "feas", "opt", "sdp"}));
  bench->add_option("--sizes", bench_args.sizes, "dimensions for --generate")->delimiter(',');
  bench->add_option("--count", bench_args.count, "instances per size for --generate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSolved : kInputError;
  }

  try {
    if (*feas) return run_feas(cfg, feas_eps);
    if (*opt) return run_opt(cfg, alpha);
    if (*sfm) return run_sfm(cfg, mode);
    if (*mat) return run_matroid(cfg, moracle);
    if (*inter) return run_intersect(cfg);
    if (*sdp) return run_sdp(cfg, sdp_eps, primal, backend);
    if (*chase) return run_chase(cfg, chase_args);
    if (*bench) return run_bench(cfg, bench_args);
  } catch (const Error& e) {
    std::cerr << "cutplane: " << e.what() << '\n';
    return code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "cutplane: " << e.what() << '\n';
    return kDiagnostic;
  }
  return kInputError;
}
