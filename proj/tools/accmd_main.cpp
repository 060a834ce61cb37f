// Flag handling for the accmd binary. Flags write into a RunManifest; when
// --manifest is given the JSON file is loaded first so that explicitly passed
// flags override its values. All computation lives in the library headers.

#include <cstddef>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "accmd/cli.hpp"

namespace {

using accmd::RunManifest;
using accmd::Vector;

Vector parse_number_list(const std::string& csv) {
  Vector out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::size_t end = comma == std::string::npos ? csv.size() : comma;
    double v = 0.0;
    if (!accmd::try_parse_double(
            std::string_view(csv.data() + start, end - start), v))
      throw accmd::usage_error("--g expects comma-separated numbers, got '" +
                               csv.substr(start, end - start) + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// The manifest keeps unset numeric knobs as empty optionals, which the
// vendored flag parser cannot bind directly; these slots hold raw values and
// transfer only the flags that were actually passed.
struct FlagSlots {
  std::size_t dim = 0;
  CLI::Option* dim_opt = nullptr;
  std::size_t rows = 0;
  CLI::Option* rows_opt = nullptr;
  double lambda = 0.0;
  CLI::Option* lambda_opt = nullptr;
  std::string g_csv;
  CLI::Option* g_opt = nullptr;
  double alpha = 0.0;
  CLI::Option* alpha_opt = nullptr;
  double mu = 0.0;
  CLI::Option* mu_opt = nullptr;
  double tol = 0.0;
  CLI::Option* tol_opt = nullptr;
  std::size_t max_iters = 0;
  CLI::Option* max_iters_opt = nullptr;
  double epsilon0 = 0.0;
  CLI::Option* epsilon0_opt = nullptr;
  int m0 = 0;
  CLI::Option* m0_opt = nullptr;
  int stages = 0;
  CLI::Option* stages_opt = nullptr;

  void apply(RunManifest& m) const {
    const auto passed = [](const CLI::Option* o) {
      return o != nullptr && o->count() > 0;
    };
    if (passed(dim_opt)) m.dim = dim;
    if (passed(rows_opt)) m.rows = rows;
    if (passed(lambda_opt)) m.lambda = lambda;
    if (passed(g_opt)) m.g = parse_number_list(g_csv);
    if (passed(alpha_opt)) m.alpha = alpha;
    if (passed(mu_opt)) m.mu = mu;
    if (passed(tol_opt)) m.tol = tol;
    if (passed(max_iters_opt)) m.max_iters = max_iters;
    if (passed(epsilon0_opt)) m.epsilon0 = epsilon0;
    if (passed(m0_opt)) m.m0 = m0;
    if (passed(stages_opt)) m.stages = stages;
  }
};

void add_problem_flags(CLI::App& cmd, RunManifest& m, FlagSlots& s,
                       std::string& manifest_path) {
  cmd.add_option("--manifest", manifest_path,
                 "JSON file with the same fields as the flags; explicit "
                 "flags win");
  cmd.add_option("--problem", m.problem,
                 "problem family: loglinear, maxmargin, quartic, lasso, "
                 "counterexample");
  s.dim_opt = cmd.add_option(
      "--dim", s.dim,
      "dimension / feature count (default 16; for svmlight data the "
      "declared feature count)");
  s.rows_opt = cmd.add_option("--rows", s.rows,
                              "sample count for synthetic lasso instances");
  cmd.add_option("--seed", m.seed, "generator seed (default 0)");
  s.g_opt = cmd.add_option(
      "--g", s.g_csv, "explicit log-linear coupling vector, comma separated");
  cmd.add_option("--data", m.data, "dataset file (lasso)");
  cmd.add_option("--format", m.format, "dataset format: csv or svmlight");
  s.lambda_opt =
      cmd.add_option("--lambda", s.lambda, "l1 weight for composite problems");
  cmd.add_option("--c-estimator", m.c_estimator,
                 "curvature constant estimator: exact, power, practical, "
                 "global-L (default: the family's own choice)");
}

void add_solver_flags(CLI::App& cmd, RunManifest& m, FlagSlots& s) {
  cmd.add_option("--solver", m.solvers,
                 "solver: md, accmd-forward, accmd-backward, perturbed, "
                 "homotopy, composite-backward");
  s.alpha_opt = cmd.add_option(
      "--alpha", s.alpha,
      "momentum weight (step size for md); default derived from mu and C");
  s.mu_opt = cmd.add_option(
      "--mu", s.mu, "override the relative strong-convexity constant");
  s.tol_opt = cmd.add_option(
      "--tol", s.tol,
      "stopping ratio on the squared residual (default 1e-12)");
  s.max_iters_opt =
      cmd.add_option("--max-iters", s.max_iters, "iteration cap");
  s.epsilon0_opt = cmd.add_option(
      "--epsilon0", s.epsilon0,
      "perturbation (for homotopy: the initial stage value, default 1)");
  s.m0_opt =
      cmd.add_option("--m0", s.m0, "homotopy initial stage length");
  s.stages_opt = cmd.add_option(
      "--stages", s.stages,
      "homotopy fixed stage count (otherwise runs until the perturbation "
      "floor)");
}

int dispatch(const std::string& chosen, const RunManifest& m) {
  try {
    if (chosen == "run") return accmd::cmd_run(m);
    if (chosen == "verify") return accmd::cmd_verify(m);
    if (chosen == "bench") return accmd::cmd_bench(m);
    return accmd::cmd_gen(m);
  } catch (const accmd::usage_error& e) {
    std::cerr << "accmd " << chosen << ": " << e.what() << "\n";
    return 2;
  } catch (const accmd::config_error& e) {
    std::cerr << "accmd " << chosen << ": " << e.what() << "\n";
    return 2;
  } catch (const accmd::io_error& e) {
    std::cerr << "accmd " << chosen << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "accmd " << chosen << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  RunManifest m;
  std::string manifest_path;

  // Pre-scan for --manifest so its values act as defaults under the real
  // parse below.
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--manifest" && i + 1 < argc)
      manifest_path = argv[i + 1];
    else if (a.rfind("--manifest=", 0) == 0)
      manifest_path = a.substr(std::string("--manifest=").size());
  }
  try {
    if (!manifest_path.empty()) m = accmd::manifest_from_file(manifest_path);
  } catch (const std::exception& e) {
    std::cerr << "accmd: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{
      "mirror-descent solver suite: run, verify, bench, and gen "
      "subcommands over seeded problem instances"};
  app.require_subcommand(1);

  FlagSlots run_slots, verify_slots, bench_slots, gen_slots;

  CLI::App* cmd_run = app.add_subcommand(
      "run", "run one solver and write its iteration trace");
  add_problem_flags(*cmd_run, m, run_slots, manifest_path);
  add_solver_flags(*cmd_run, m, run_slots);
  cmd_run->add_option("--out", m.out,
                      "trace CSV path (default: stdout)");
  cmd_run->add_option("--json-summary", m.json_summary,
                      "write a JSON run summary to this path");
  cmd_run->add_flag("--no-timing", m.no_timing,
                    "leave the wall-clock column empty (reproducible "
                    "output)");

  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "evaluate algebraic identity and curvature checks");
  add_problem_flags(*cmd_verify, m, verify_slots, manifest_path);
  add_solver_flags(*cmd_verify, m, verify_slots);
  cmd_verify->add_flag("--all", m.all_checks,
                       "run the full standard check suite");
  cmd_verify->add_option(
      "--check", m.checks,
      "named check: three-point, strong-lyapunov, perturbed-lyapunov, "
      "step-identity, gcs (repeatable)");
  cmd_verify->add_option(
      "--mirror", m.mirror,
      "standalone three-point subject: entropy, entropy-orthant, quadratic, "
      "quartic");
  cmd_verify->add_option("--samples", m.samples,
                         "sample or step count per check (default 500)");
  cmd_verify->add_option("--json-summary", m.json_summary,
                         "also write the JSON report to this path");

  CLI::App* cmd_bench = app.add_subcommand(
      "bench", "compare two or more solvers on one instance");
  add_problem_flags(*cmd_bench, m, bench_slots, manifest_path);
  add_solver_flags(*cmd_bench, m, bench_slots);
  cmd_bench->add_option(
      "--target", m.target,
      "relative objective gap that counts as solved (default 1e-8)");
  cmd_bench->add_option("--json-summary", m.json_summary,
                        "write the comparison as JSON to this path");
  cmd_bench->add_flag("--no-timing", m.no_timing,
                      "drop wall-clock columns (reproducible output)");

  CLI::App* cmd_gen = app.add_subcommand(
      "gen", "write a problem instance to disk (arrays as CSV, metadata as "
             "JSON)");
  add_problem_flags(*cmd_gen, m, gen_slots, manifest_path);
  cmd_gen->add_option("--out", m.out,
                      "base path: metadata to BASE.json, arrays to "
                      "BASE_<name>.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* chosen_app = app.get_subcommands().front();
  const std::string chosen = chosen_app->get_name();
  try {
    if (chosen == "run")
      run_slots.apply(m);
    else if (chosen == "verify")
      verify_slots.apply(m);
    else if (chosen == "bench")
      bench_slots.apply(m);
    else
      gen_slots.apply(m);
  } catch (const std::exception& e) {
    std::cerr << "accmd: " << e.what() << "\n";
    return 2;
  }
  if (!m.subcommand.empty() && m.subcommand != chosen) {
    std::cerr << "accmd: manifest names subcommand '" << m.subcommand
              << "' but '" << chosen << "' was invoked\n";
    return 2;
  }

  return dispatch(chosen, m);
}
