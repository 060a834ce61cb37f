#pragma once

// Command-line front end. A RunManifest carries everything a subcommand
// needs; flags fill it directly, and --manifest pre-loads the same fields
// from a JSON file whose keys are the long flag names (explicit flags win).
// Every path resolves the manifest to a concrete problem and solver
// configuration before computing anything, so bad requests exit with code 2
// and nothing half-written.
//
// Exit codes: 0 success (verify: all checks passed), 1 runtime failure
// (aborted run, failed checks, unwritable output), 2 usage or configuration.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accmd/certify.hpp"
#include "accmd/common.hpp"
#include "accmd/dataset.hpp"
#include "accmd/format.hpp"
#include "accmd/mirror.hpp"
#include "accmd/objective.hpp"
#include "accmd/ratefit.hpp"
#include "accmd/solver.hpp"

namespace accmd {

// ---------------------------------------------------------------------------
// Logging. Level comes from the ACCMD_LOG environment variable: quiet
// (default), info, debug. Log lines go to stderr so stdout stays
// machine-readable.

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* e = std::getenv("ACCMD_LOG");
    if (e == nullptr) return LogLevel::quiet;
    const std::string s(e);
    if (s == "debug" || s == "2") return LogLevel::debug;
    if (s == "info" || s == "1") return LogLevel::info;
    return LogLevel::quiet;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (static_cast<int>(log_level()) >= static_cast<int>(LogLevel::info))
    std::cerr << "[accmd] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (static_cast<int>(log_level()) >= static_cast<int>(LogLevel::debug))
    std::cerr << "[accmd] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// Manifest.

struct RunManifest {
  std::string subcommand;  // validated against the invoked one when set

  // Problem selection.
  std::string problem;  // loglinear | maxmargin | quartic | lasso |
                        // counterexample
  std::optional<std::size_t> dim;
  std::optional<std::size_t> rows;  // synthetic regression sample count
  std::uint64_t seed = 0;
  std::optional<Vector> g;  // explicit log-linear coupling vector
  std::string data;         // dataset path (regression families)
  std::string format = "csv";  // csv | svmlight
  std::optional<double> lambda;
  std::string c_estimator;  // exact | power | practical | global-L

  // Solver selection (run: exactly one; bench: two or more).
  std::vector<std::string> solvers;
  std::optional<double> alpha;  // momentum weight; step size for md
  std::optional<double> mu;
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::optional<double> epsilon0;
  std::optional<int> m0;
  std::optional<int> stages;

  // Verification selection.
  bool all_checks = false;
  std::vector<std::string> checks;
  std::string mirror;  // standalone three-point subject
  std::size_t samples = 500;

  // Benchmark: relative objective gap that counts as solved.
  double target = 1e-8;

  // Outputs.
  std::string out;
  std::string json_summary;
  bool no_timing = false;
};

namespace detail {

[[noreturn]] inline void manifest_fail(const std::string& key,
                                       const char* want) {
  throw usage_error("manifest: field '" + key + "' must be " + want);
}

template <typename T>
T manifest_get(const nlohmann::ordered_json& v, const std::string& key,
               const char* want) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    manifest_fail(key, want);
  }
}

inline std::vector<std::string> manifest_names(const nlohmann::ordered_json& v,
                                               const std::string& key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) manifest_fail(key, "a string or array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  manifest_fail(key, "a string or array of strings");
}

}  // namespace detail

inline RunManifest manifest_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object())
    throw usage_error("manifest: top level must be a JSON object");
  RunManifest m;
  for (const auto& [key, value] : j.items()) {
    if (key == "subcommand") {
      m.subcommand = detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "problem") {
      m.problem = detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "dim") {
      m.dim = detail::manifest_get<std::size_t>(value, key, "an integer");
    } else if (key == "rows") {
      m.rows = detail::manifest_get<std::size_t>(value, key, "an integer");
    } else if (key == "seed") {
      m.seed = detail::manifest_get<std::uint64_t>(value, key, "an integer");
    } else if (key == "g") {
      if (!value.is_array()) detail::manifest_fail(key, "an array of numbers");
      Vector g;
      for (const auto& e : value) {
        if (!e.is_number()) detail::manifest_fail(key, "an array of numbers");
        g.push_back(e.get<double>());
      }
      m.g = std::move(g);
    } else if (key == "data") {
      m.data = detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "format") {
      m.format = detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "lambda") {
      m.lambda = detail::manifest_get<double>(value, key, "a number");
    } else if (key == "c-estimator") {
      m.c_estimator =
          detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "solver") {
      m.solvers = detail::manifest_names(value, key);
    } else if (key == "alpha") {
      m.alpha = detail::manifest_get<double>(value, key, "a number");
    } else if (key == "mu") {
      m.mu = detail::manifest_get<double>(value, key, "a number");
    } else if (key == "tol") {
      m.tol = detail::manifest_get<double>(value, key, "a number");
    } else if (key == "max-iters") {
      m.max_iters =
          detail::manifest_get<std::size_t>(value, key, "an integer");
    } else if (key == "epsilon0") {
      m.epsilon0 = detail::manifest_get<double>(value, key, "a number");
    } else if (key == "m0") {
      m.m0 = detail::manifest_get<int>(value, key, "an integer");
    } else if (key == "stages") {
      m.stages = detail::manifest_get<int>(value, key, "an integer");
    } else if (key == "all") {
      m.all_checks = detail::manifest_get<bool>(value, key, "a boolean");
    } else if (key == "check") {
      m.checks = detail::manifest_names(value, key);
    } else if (key == "mirror") {
      m.mirror = detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "samples") {
      m.samples = detail::manifest_get<std::size_t>(value, key, "an integer");
    } else if (key == "target") {
      m.target = detail::manifest_get<double>(value, key, "a number");
    } else if (key == "out") {
      m.out = detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "json-summary") {
      m.json_summary =
          detail::manifest_get<std::string>(value, key, "a string");
    } else if (key == "no-timing") {
      m.no_timing = detail::manifest_get<bool>(value, key, "a boolean");
    } else {
      throw usage_error("manifest: unknown field '" + key + "'");
    }
  }
  return m;
}

inline RunManifest manifest_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read manifest file: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw usage_error("manifest parse error in " + path + ": " + e.what());
  }
  return manifest_from_json(j);
}

// ---------------------------------------------------------------------------
// Manifest resolution.

inline DataFormat parse_data_format(const std::string& s) {
  if (s == "csv") return DataFormat::csv;
  if (s == "svmlight") return DataFormat::svmlight;
  throw usage_error("unknown data format: " + s +
                    " (expected csv or svmlight)");
}

inline GcsMethod parse_gcs_method(const std::string& s) {
  for (GcsMethod m : {GcsMethod::exact_formula, GcsMethod::power_method,
                      GcsMethod::practical_adaptive, GcsMethod::global_l})
    if (s == gcs_method_name(m)) return m;
  throw usage_error("unknown curvature estimator: " + s +
                    " (expected exact, power, practical, or global-L)");
}

inline MirrorPtr make_mirror(const std::string& name, std::size_t dim) {
  if (name == "entropy")
    return std::make_shared<EntropyMirror>(
        dim, EntropyMirror::Mode::simplex_restricted);
  if (name == "entropy-orthant")
    return std::make_shared<EntropyMirror>(
        dim, EntropyMirror::Mode::positive_orthant);
  if (name == "quadratic")
    return std::make_shared<QuadraticMirror>(DiagonalMatrix{Vector(dim, 1.0)});
  if (name == "quartic") return std::make_shared<QuarticMirror>(dim);
  throw usage_error(
      "unknown mirror: " + name +
      " (expected entropy, entropy-orthant, quadratic, quartic)");
}

inline std::string problem_summary(const ProblemInstance& p) {
  std::string s = "problem " + p.name + " dim=" + std::to_string(p.dim()) +
                  " seed=" + std::to_string(p.seed) +
                  " mu=" + format_double(p.f->mu()) +
                  " L=" + format_double(p.f->smoothness()) +
                  " C=" + format_double(p.gcs.value) + " (" +
                  gcs_method_name(p.gcs.method) + ")";
  if (p.g.kind == NonsmoothTerm::Kind::l1)
    s += " lambda=" + format_double(p.g.lambda);
  return s;
}

inline ProblemInstance resolve_problem(const RunManifest& m) {
  if (m.problem.empty())
    throw usage_error(
        "--problem is required (loglinear, maxmargin, quartic, lasso, "
        "counterexample)");
  const std::size_t dim = m.dim.value_or(16);
  ProblemInstance p = [&]() -> ProblemInstance {
    if (m.problem == "loglinear") {
      if (m.g) {
        if (m.dim && *m.dim != m.g->size())
          throw usage_error("--dim disagrees with the length of --g");
        return make_log_linear(*m.g, m.seed);
      }
      return make_log_linear(dim, m.seed);
    }
    if (m.problem == "maxmargin") return make_max_margin(dim, m.seed);
    if (m.problem == "quartic") return make_quartic(dim, m.seed);
    if (m.problem == "counterexample") {
      if (m.dim && *m.dim != 1)
        throw usage_error("the counterexample family is one-dimensional");
      return make_counterexample_1d();
    }
    if (m.problem == "lasso") {
      if (!m.lambda) throw usage_error("lasso needs --lambda");
      if (!m.data.empty()) {
        Dataset ds = load_dataset(m.data, parse_data_format(m.format),
                                  m.dim.value_or(0));
        log_info("loaded " + m.data + ": " + std::to_string(ds.rows()) +
                 " samples x " + std::to_string(ds.cols()) + " features");
        return make_lasso(std::move(ds.features), std::move(ds.response),
                          *m.lambda, m.seed);
      }
      if (!m.rows)
        throw usage_error(
            "synthetic lasso needs --rows (samples) and --dim (features)");
      return make_lasso(*m.rows, dim, m.seed, *m.lambda);
    }
    throw usage_error("unknown problem family: " + m.problem);
  }();
  if (!m.c_estimator.empty()) {
    GcsParams params;
    params.seed = derive_seed(m.seed, 23);
    p.gcs = estimate_gcs(*p.f, parse_gcs_method(m.c_estimator), params);
  }
  log_info(problem_summary(p));
  return p;
}

inline SolverConfig resolve_config(const RunManifest& m,
                                   const std::string& solver) {
  const auto alg = algorithm_from_name(solver);
  if (!alg)
    throw usage_error("unknown solver: " + solver +
                      " (expected md, accmd-forward, accmd-backward, "
                      "perturbed, homotopy, composite-backward)");
  SolverConfig cfg;
  cfg.algorithm = *alg;
  if (m.alpha) {
    if (*alg == Algorithm::md)
      cfg.step = m.alpha;
    else
      cfg.alpha = m.alpha;
  }
  if (m.epsilon0) cfg.epsilon0 = m.epsilon0;
  if (m.m0) cfg.m0 = m.m0;
  if (m.stages) cfg.stages = m.stages;
  if (m.mu) cfg.mu_override = m.mu;
  if (m.tol) cfg.tol = *m.tol;
  if (m.max_iters) cfg.max_iters = *m.max_iters;
  return cfg;
}

// ---------------------------------------------------------------------------
// run: one solver, trace to CSV (stdout or --out), summary to --json-summary.

inline int cmd_run(const RunManifest& m) {
  const ProblemInstance p = resolve_problem(m);
  if (m.solvers.size() != 1)
    throw usage_error("run needs exactly one --solver");
  SolverConfig cfg = resolve_config(m, m.solvers.front());
  cfg.record_time = !m.no_timing;

  // The Lyapunov columns need an anchor; degrade to empty cells when no
  // reference can be computed.
  std::optional<Vector> anchor;
  try {
    anchor = reference_minimizer(p);
  } catch (const std::exception& e) {
    log_info(std::string("no reference minimizer; Lyapunov columns stay "
                         "empty (") +
             e.what() + ")");
  }
  const Trace tr = run(p, cfg, anchor ? &*anchor : nullptr);

  if (m.out.empty()) {
    write_trace_csv(std::cout, tr);
  } else {
    write_trace_csv(m.out, tr);
    log_info("trace written to " + m.out);
  }
  if (!m.json_summary.empty()) {
    write_trace_json(m.json_summary, tr);
    log_info("summary written to " + m.json_summary);
  }
  if (tr.aborted) {
    std::cerr << "accmd run: aborted: " << tr.diagnostic << "\n";
    return 1;
  }
  log_info("finished after " + std::to_string(tr.iterations) + " iterations" +
           (tr.converged ? " (converged)" : " (iteration cap)"));
  return 0;
}

// ---------------------------------------------------------------------------
// verify: named checks or the full standard suite; JSON report to stdout.

namespace detail {

inline void require_known_check(const std::string& name) {
  for (const char* known : {"three-point", "strong-lyapunov",
                            "perturbed-lyapunov", "step-identity", "gcs"})
    if (name == known) return;
  throw usage_error("unknown check: " + name +
                    " (expected three-point, strong-lyapunov, "
                    "perturbed-lyapunov, step-identity, gcs)");
}

inline std::vector<CheckReport> named_check(const RunManifest& m,
                                            const std::string& name) {
  std::vector<CheckReport> out;
  if (name == "three-point") {
    if (!m.mirror.empty()) {
      const std::size_t dim = m.dim.value_or(16);
      const MirrorPtr phi = make_mirror(m.mirror, dim);
      out.push_back(check_three_point(*phi, dim, m.samples, m.seed));
    } else {
      const ProblemInstance p = resolve_problem(m);
      out.push_back(
          check_three_point(p.f->mirror(), p.dim(), m.samples, m.seed));
    }
    return out;
  }

  const ProblemInstance p = resolve_problem(m);
  const Vector anchor = reference_minimizer(p);
  if (name == "strong-lyapunov") {
    out.push_back(check_strong_lyapunov(p, m.samples, m.seed, anchor));
  } else if (name == "perturbed-lyapunov") {
    out.push_back(check_perturbed_lyapunov(p, m.epsilon0.value_or(1e-2),
                                           m.samples, m.seed, anchor));
  } else if (name == "gcs") {
    out.push_back(check_gcs(p, m.samples, m.seed, anchor));
  } else {  // step-identity
    const auto identity_run = [&](SolverConfig cfg) {
      cfg.tol = m.tol.value_or(0.0);
      cfg.max_iters = m.max_iters.value_or(m.samples);
      cfg.record_trajectory = true;
      out.push_back(check_step_identity(p, run(p, cfg), anchor));
    };
    if (!m.solvers.empty()) {
      for (const auto& sname : m.solvers)
        identity_run(resolve_config(m, sname));
    } else {
      if (p.f->mu() > 0.0) {
        for (Algorithm a :
             {Algorithm::accmd_forward, Algorithm::accmd_backward}) {
          SolverConfig cfg;
          cfg.algorithm = a;
          identity_run(cfg);
        }
      }
      if (p.g.kind != NonsmoothTerm::Kind::l1) {
        SolverConfig cfg;
        cfg.algorithm = Algorithm::perturbed;
        cfg.epsilon0 = m.epsilon0.value_or(1e-2);
        identity_run(cfg);
      }
      if (out.empty())
        throw config_error(
            "per-step identities cover the smooth and simplex-restricted "
            "updates only");
    }
  }
  return out;
}

}  // namespace detail

inline int cmd_verify(const RunManifest& m) {
  std::vector<CheckReport> reports;
  if (m.all_checks) {
    if (!m.checks.empty())
      throw usage_error("pass either --all or --check, not both");
    const ProblemInstance p = resolve_problem(m);
    reports = standard_checks(p, m.samples, m.seed);
  } else {
    if (m.checks.empty())
      throw usage_error("verify needs --all or --check <name>");
    for (const auto& name : m.checks) detail::require_known_check(name);
    for (const auto& name : m.checks) {
      auto batch = detail::named_check(m, name);
      reports.insert(reports.end(), std::make_move_iterator(batch.begin()),
                     std::make_move_iterator(batch.end()));
    }
  }

  const nlohmann::ordered_json j = check_reports_json(reports);
  std::cout << j.dump(2) << "\n";
  if (!m.json_summary.empty()) {
    std::ofstream outf(m.json_summary);
    if (!outf) throw io_error("cannot write report file: " + m.json_summary);
    outf << j.dump(2) << "\n";
    log_info("report written to " + m.json_summary);
  }

  std::size_t failed = 0;
  for (const auto& r : reports) {
    if (!r.passed) ++failed;
    log_info(r.name + " [" + r.subject + "]: " +
             (r.passed ? "pass" : "FAIL") + " (max rel residual " +
             format_double(r.max_rel_residual) + ")");
  }
  if (failed > 0) {
    std::cerr << "accmd verify: " << failed << " of " << reports.size()
              << " checks failed\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench: the same instance under two or more solver configurations.

namespace detail {

inline std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

inline std::string fixed4(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4f", v);
  return b;
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s + "  ";
}

inline std::optional<double> time_at(const Trace& tr, std::size_t k) {
  for (const auto& r : tr.records)
    if (r.k == k) return r.time_ms;
  return std::nullopt;
}

}  // namespace detail

inline int cmd_bench(const RunManifest& m) {
  if (m.solvers.size() < 2)
    throw usage_error("bench needs at least two --solver entries to compare");
  const ProblemInstance p = resolve_problem(m);

  std::vector<SolverConfig> cfgs;
  cfgs.reserve(m.solvers.size());
  for (const auto& name : m.solvers) {
    SolverConfig cfg = resolve_config(m, name);
    cfg.record_time = !m.no_timing;
    cfgs.push_back(std::move(cfg));
  }

  // Independent runs on an immutable instance; execute concurrently. Results
  // are position-stable, so scheduling cannot change the table.
  std::vector<Trace> traces(cfgs.size());
  {
    std::vector<std::future<Trace>> futures;
    futures.reserve(cfgs.size());
    for (const auto& cfg : cfgs)
      futures.push_back(std::async(std::launch::async,
                                   [&p, &cfg] { return run(p, cfg); }));
    for (std::size_t i = 0; i < futures.size(); ++i)
      traces[i] = futures[i].get();
  }

  // Reference objective: a tight reference run when available, tightened
  // further by the best value any contender reached.
  double f_ref = std::numeric_limits<double>::infinity();
  try {
    f_ref = p.composite_value(reference_minimizer(p));
  } catch (const std::exception& e) {
    log_info(std::string("no reference minimizer for the gap column (") +
             e.what() + ")");
  }
  for (const auto& tr : traces)
    if (!tr.records.empty())
      f_ref = std::min(f_ref, tr.records.back().obj);

  std::ostringstream os;
  os << "# bench " << problem_summary(p)
     << " target=" << detail::sci(m.target)
     << " f_ref=" << format_double(f_ref) << "\n";
  os << detail::pad("solver", 18) << detail::pad("status", 9)
     << detail::pad("iters", 8) << detail::pad("to_target", 9)
     << detail::pad("final_gap", 10) << detail::pad("contraction", 11)
     << detail::pad("power_slope", 11);
  if (!m.no_timing)
    os << detail::pad("time_ms", 10) << detail::pad("t_target_ms", 11);
  os << "\n";

  nlohmann::ordered_json solvers_json = nlohmann::ordered_json::array();
  bool any_aborted = false;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const Trace& tr = traces[i];
    const auto to_target = iterations_to_target(tr, f_ref, m.target);
    std::vector<double> ks, objs;
    for (const auto& r : tr.records) {
      ks.push_back(static_cast<double>(r.k));
      objs.push_back(r.obj);
    }
    const RateFit fit = fit_rate(
        ks, objs, f_ref, std::max<std::size_t>(10, ks.size() / 2));
    const double final_gap =
        tr.records.empty()
            ? std::numeric_limits<double>::quiet_NaN()
            : std::max(0.0, tr.records.back().obj - f_ref);
    const std::string status =
        tr.aborted ? "aborted" : (tr.converged ? "converged" : "capped");
    if (tr.aborted) {
      any_aborted = true;
      std::cerr << "accmd bench: " << m.solvers[i]
                << " aborted: " << tr.diagnostic << "\n";
    }

    os << detail::pad(m.solvers[i], 18) << detail::pad(status, 9)
       << detail::pad(std::to_string(tr.iterations), 8)
       << detail::pad(to_target ? std::to_string(*to_target) : "-", 9)
       << detail::pad(detail::sci(final_gap), 10)
       << detail::pad(fit.conclusive ? detail::fixed4(fit.contraction) : "-",
                      11)
       << detail::pad(fit.conclusive ? detail::fixed4(fit.power_slope) : "-",
                      11);
    if (!m.no_timing) {
      const auto total =
          tr.records.empty() ? std::nullopt : tr.records.back().time_ms;
      const auto at_target =
          to_target ? detail::time_at(tr, *to_target) : std::nullopt;
      os << detail::pad(total ? detail::fixed4(*total) : "-", 10)
         << detail::pad(at_target ? detail::fixed4(*at_target) : "-", 11);
    }
    os << "\n";

    nlohmann::ordered_json sj;
    sj["solver"] = m.solvers[i];
    sj["status"] = status;
    sj["iterations"] = tr.iterations;
    if (to_target)
      sj["to_target"] = *to_target;
    else
      sj["to_target"] = nullptr;
    sj["final_gap"] = final_gap;
    nlohmann::ordered_json fj;
    fj["conclusive"] = fit.conclusive;
    fj["points"] = fit.points;
    if (fit.conclusive) {
      fj["slope"] = fit.slope;
      fj["contraction"] = fit.contraction;
      fj["power_slope"] = fit.power_slope;
    }
    sj["rate_fit"] = fj;
    if (!m.no_timing && !tr.records.empty() && tr.records.back().time_ms)
      sj["time_ms"] = *tr.records.back().time_ms;
    solvers_json.push_back(std::move(sj));
  }
  std::cout << os.str();

  if (!m.json_summary.empty()) {
    nlohmann::ordered_json j;
    j["problem"] = p.name;
    j["dim"] = p.dim();
    j["seed"] = p.seed;
    j["target"] = m.target;
    j["f_ref"] = f_ref;
    j["solvers"] = std::move(solvers_json);
    std::ofstream outf(m.json_summary);
    if (!outf)
      throw io_error("cannot write summary file: " + m.json_summary);
    outf << j.dump(2) << "\n";
    log_info("summary written to " + m.json_summary);
  }
  return any_aborted ? 1 : 0;
}

// ---------------------------------------------------------------------------
// gen: persist a problem instance (arrays as CSV, metadata as JSON).

namespace detail {

inline void save_matrix_csv(const std::string& path, const DenseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write matrix file: " + path);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (j > 0) out << ",";
      out << format_double(a(i, j));
    }
    out << "\n";
  }
}

inline void save_vector_csv(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write vector file: " + path);
  for (double t : v) out << format_double(t) << "\n";
}

}  // namespace detail

inline int cmd_gen(const RunManifest& m) {
  if (m.out.empty()) throw usage_error("gen needs --out <base path>");
  const ProblemInstance p = resolve_problem(m);
  const std::string& base = m.out;

  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  const auto emit_matrix = [&](const char* tag, const DenseMatrix& a) {
    const std::string path = base + "_" + tag + ".csv";
    detail::save_matrix_csv(path, a);
    files[tag] = path;
  };
  const auto emit_vector = [&](const char* tag, const Vector& v) {
    const std::string path = base + "_" + tag + ".csv";
    detail::save_vector_csv(path, v);
    files[tag] = path;
  };

  if (const auto* f = dynamic_cast<const LogLinearObjective*>(p.f.get())) {
    emit_vector("g", f->coupling());
  } else if (const auto* f =
                 dynamic_cast<const MaxMarginObjective*>(p.f.get())) {
    emit_matrix("A", f->quadratic());
    emit_vector("b", f->linear());
  } else if (const auto* f = dynamic_cast<const QuarticObjective*>(p.f.get())) {
    emit_matrix("E", f->e());
    emit_matrix("A", f->a());
    emit_matrix("C", f->c());
    emit_vector("b", f->b());
    emit_vector("d", f->d());
  } else if (const auto* f =
                 dynamic_cast<const LeastSquaresObjective*>(p.f.get())) {
    // Written in the loadable dataset layout so the file feeds --data.
    const DataFormat fmt = parse_data_format(m.format);
    const std::string path =
        base + (fmt == DataFormat::csv ? "_data.csv" : "_data.svmlight");
    save_dataset(path, f->design(), f->response(), fmt);
    files["data"] = path;
  }
  // The 1-d boundary example carries no arrays; metadata only.

  nlohmann::ordered_json meta;
  meta["problem"] = p.name;
  meta["dim"] = p.dim();
  meta["seed"] = p.seed;
  meta["mirror"] = p.f->mirror().name();
  meta["mu"] = p.f->mu();
  meta["L"] = p.f->smoothness();
  meta["C"] = p.gcs.value;
  meta["c_method"] = gcs_method_name(p.gcs.method);
  if (p.gcs.local_radius) meta["c_local_radius"] = *p.gcs.local_radius;
  if (p.g.kind == NonsmoothTerm::Kind::l1) meta["lambda"] = p.g.lambda;
  meta["files"] = files;

  const std::string meta_path = base + ".json";
  std::ofstream outf(meta_path);
  if (!outf) throw io_error("cannot write metadata file: " + meta_path);
  outf << meta.dump(2) << "\n";
  log_info("instance written to " + meta_path);
  return 0;
}

}  // namespace accmd
