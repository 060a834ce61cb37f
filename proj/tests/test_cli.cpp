#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"

namespace {

using nlohmann::ordered_json;

const std::string bin = ACCMD_BIN;

std::string work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "accmd_cli_tests";
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::vector<std::string> split(const std::string& s, char d) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == d) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  auto ls = split(text, '\n');
  while (!ls.empty() && ls.back().empty()) ls.pop_back();
  return ls;
}

}  // namespace

TEST_CASE("run writes a trace with decaying energy columns", "[cli]") {
  const auto dir = work_dir();
  const auto trace = dir + "/fwd.csv";
  const auto summary = dir + "/fwd.json";
  const auto res = oracle::run_cmd(
      bin +
      " run --problem loglinear --dim 64 --seed 7 --solver accmd-forward"
      " --no-timing --out " +
      trace + " --json-summary " + summary);
  REQUIRE(res.status == 0);

  const auto rows = lines_of(oracle::read_file(trace));
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == "k,obj,grad_norm_sq,lyap_E,lyap_Ealpha,time_ms");
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i], ',');
    REQUIRE(cells.size() == 6);
    REQUIRE_FALSE(cells[4].empty());
    const double ealpha = std::stod(cells[4]);
    CHECK(ealpha <= prev + 1e-12);
    prev = ealpha;
    CHECK(cells[5].empty());  // timing disabled
  }

  const auto j = ordered_json::parse(oracle::read_file(summary));
  CHECK(j.at("problem") == "loglinear");
  CHECK(j.at("algorithm") == "accmd-forward");
  CHECK(j.at("dim") == 64);
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("final").at("residual_ratio").get<double>() <= 1e-12);
  CHECK(j.at("rate_fit").at("conclusive").get<bool>());
}

TEST_CASE("run honors a zero iteration budget", "[cli]") {
  const auto trace = work_dir() + "/zero.csv";
  const auto res = oracle::run_cmd(
      bin +
      " run --problem loglinear --dim 8 --seed 3 --solver accmd-forward"
      " --max-iters 0 --out " +
      trace);
  REQUIRE(res.status == 0);
  const auto rows = lines_of(oracle::read_file(trace));
  REQUIRE(rows.size() == 2);
  CHECK(split(rows[1], ',')[0] == "0");
}

TEST_CASE("an unstable run exits with a runtime failure and a partial trace",
          "[cli]") {
  const auto dir = work_dir();
  const auto trace = dir + "/diverge.csv";
  const auto err = dir + "/diverge.err";
  const auto res = oracle::run_cmd(
      bin +
      " run --problem counterexample --solver md --alpha 3.0 --max-iters 100"
      " --out " +
      trace + " 2>" + err);
  CHECK(res.status == 1);
  CHECK(oracle::read_file(err).find("aborted") != std::string::npos);
  const auto rows = lines_of(oracle::read_file(trace));
  CHECK(rows.size() > 2);
  CHECK(rows.size() < 50);  // stopped well before the cap
}

TEST_CASE("verify runs a named identity check", "[cli]") {
  const auto res = oracle::run_cmd(
      bin + " verify --check three-point --mirror quadratic --dim 8");
  REQUIRE(res.status == 0);
  const auto j = ordered_json::parse(res.out);
  REQUIRE(j.at("checks").size() == 1);
  CHECK(j.at("checks")[0].at("check") == "three-point");
  CHECK(j.at("checks")[0].at("max_rel_residual").get<double>() <= 1e-12);
  CHECK(j.at("all_passed").get<bool>());
}

TEST_CASE("verify --all passes on a strongly convex instance", "[cli]") {
  const auto res = oracle::run_cmd(
      bin + " verify --all --problem loglinear --dim 16 --seed 1"
            " --samples 200");
  REQUIRE(res.status == 0);
  const auto j = ordered_json::parse(res.out);
  CHECK(j.at("all_passed").get<bool>());
  CHECK(j.at("checks").size() == 7);
}

TEST_CASE("verify rejects unknown checks", "[cli]") {
  const auto res = oracle::run_cmd(
      bin + " verify --problem loglinear --check bogus 2>/dev/null");
  CHECK(res.status == 2);
}

TEST_CASE("bench needs at least two solvers", "[cli]") {
  const auto res = oracle::run_cmd(
      bin + " bench --problem loglinear --dim 8 --solver md 2>/dev/null");
  CHECK(res.status == 2);
}

TEST_CASE("bench compares solvers deterministically", "[cli]") {
  const std::string cmd =
      bin +
      " bench --problem loglinear --dim 16 --seed 1 --solver md"
      " --solver accmd-forward --target 1e-8 --no-timing";
  const auto first = oracle::run_cmd(cmd);
  const auto second = oracle::run_cmd(cmd);
  REQUIRE(first.status == 0);
  REQUIRE(second.status == 0);
  CHECK(first.out == second.out);
  const auto rows = lines_of(first.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rfind("# bench problem loglinear", 0) == 0);
  CHECK(rows[1].rfind("solver", 0) == 0);
  CHECK(rows[2].rfind("md", 0) == 0);
  CHECK(rows[3].rfind("accmd-forward", 0) == 0);
}

TEST_CASE("gen writes reproducible instances with metadata", "[cli]") {
  const auto dir = work_dir();
  const auto res = oracle::run_cmd(bin +
                                   " gen --problem quartic --dim 256 --seed 0"
                                   " --out " +
                                   dir + "/quartic");
  REQUIRE(res.status == 0);
  const auto meta =
      ordered_json::parse(oracle::read_file(dir + "/quartic.json"));
  CHECK(std::fabs(meta.at("mu").get<double>() - 1.0) < 0.05);
  CHECK(meta.at("C") == meta.at("L"));
  CHECK(meta.at("c_method") == "global-L");
  CHECK(meta.at("files").contains("E"));

  // Same seed, fresh invocation: identical bytes.
  REQUIRE(oracle::run_cmd(bin +
                          " gen --problem quartic --dim 32 --seed 9 --out " +
                          dir + "/qa")
              .status == 0);
  REQUIRE(oracle::run_cmd(bin +
                          " gen --problem quartic --dim 32 --seed 9 --out " +
                          dir + "/qb")
              .status == 0);
  CHECK(oracle::read_file(dir + "/qa_A.csv") ==
        oracle::read_file(dir + "/qb_A.csv"));
  CHECK(oracle::read_file(dir + "/qa_E.csv") ==
        oracle::read_file(dir + "/qb_E.csv"));

  const auto g = oracle::run_cmd(bin + " gen --problem loglinear --g 3,4" +
                                 " --out " + dir + "/ll");
  REQUIRE(g.status == 0);
  const auto llmeta = ordered_json::parse(oracle::read_file(dir + "/ll.json"));
  CHECK(llmeta.at("dim") == 2);
  CHECK(llmeta.at("C").get<double>() == 25.0);
  CHECK(llmeta.at("mu").get<double>() == 1.0);
  CHECK(llmeta.at("L").get<double>() == 17.0);
  CHECK(llmeta.at("c_method") == "exact");

  const auto ce = oracle::run_cmd(bin + " gen --problem counterexample --out " +
                                  dir + "/ce");
  REQUIRE(ce.status == 0);
  const auto cemeta = ordered_json::parse(oracle::read_file(dir + "/ce.json"));
  CHECK(cemeta.at("c_local_radius").get<double>() ==
        Catch::Approx(std::exp(-1.0)));

  const auto est = oracle::run_cmd(
      bin + " gen --problem maxmargin --dim 12 --seed 4"
            " --c-estimator global-L --out " +
      dir + "/mm");
  REQUIRE(est.status == 0);
  const auto mmmeta = ordered_json::parse(oracle::read_file(dir + "/mm.json"));
  CHECK(mmmeta.at("c_method") == "global-L");
  CHECK(mmmeta.at("C") == mmmeta.at("L"));
}

TEST_CASE("gen fails cleanly on unwritable destinations", "[cli]") {
  const auto res = oracle::run_cmd(
      bin + " gen --problem loglinear --dim 4"
            " --out /nonexistent-dir-accmd/base 2>/dev/null");
  CHECK(res.status == 1);
}

TEST_CASE("generated lasso datasets feed the solver back", "[cli]") {
  const auto dir = work_dir();
  const auto gen = oracle::run_cmd(
      bin + " gen --problem lasso --rows 10 --dim 20 --seed 4 --lambda 0.05"
            " --out " +
      dir + "/lasso");
  REQUIRE(gen.status == 0);
  const auto meta =
      ordered_json::parse(oracle::read_file(dir + "/lasso.json"));
  CHECK(meta.at("lambda").get<double>() == 0.05);
  const std::string data = meta.at("files").at("data").get<std::string>();

  const auto res = oracle::run_cmd(
      bin + " run --problem lasso --data " + data +
      " --lambda 0.05 --solver homotopy --tol 1e-10 --max-iters 500000"
      " --no-timing --json-summary " +
      dir + "/lasso_run.json --out /dev/null");
  REQUIRE(res.status == 0);
  const auto j = ordered_json::parse(oracle::read_file(dir + "/lasso_run.json"));
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("dim") == 20);
}

TEST_CASE("identical invocations produce identical bytes", "[cli]") {
  const auto dir = work_dir();
  const std::string base =
      bin +
      " run --problem maxmargin --dim 16 --seed 5 --solver perturbed"
      " --epsilon0 1e-3 --max-iters 500 --tol 0 --no-timing";
  const auto a = oracle::run_cmd(base + " --json-summary " + dir + "/da.json");
  const auto b = oracle::run_cmd(base + " --json-summary " + dir + "/db.json");
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  CHECK(a.out == b.out);  // the trace itself goes to stdout
  CHECK(oracle::read_file(dir + "/da.json") ==
        oracle::read_file(dir + "/db.json"));
}

TEST_CASE("manifests preload flags and explicit flags win", "[cli]") {
  const auto dir = work_dir();
  const auto manifest = dir + "/run.json";
  oracle::write_file(manifest, R"({
  "subcommand": "run",
  "problem": "loglinear",
  "dim": 8,
  "seed": 3,
  "solver": "accmd-forward",
  "max-iters": 5000,
  "no-timing": true
})");
  const auto plain = oracle::run_cmd(bin + " run --manifest " + manifest +
                                     " --json-summary " + dir +
                                     "/m1.json --out /dev/null");
  REQUIRE(plain.status == 0);
  CHECK(ordered_json::parse(oracle::read_file(dir + "/m1.json")).at("dim") ==
        8);

  const auto override_run = oracle::run_cmd(
      bin + " run --manifest " + manifest + " --dim 12 --json-summary " + dir +
      "/m2.json --out /dev/null");
  REQUIRE(override_run.status == 0);
  CHECK(ordered_json::parse(oracle::read_file(dir + "/m2.json")).at("dim") ==
        12);

  // The manifest pins its subcommand.
  const auto mismatch = oracle::run_cmd(bin + " verify --manifest " + manifest +
                                        " --all 2>/dev/null");
  CHECK(mismatch.status == 2);

  const auto bad = dir + "/bad.json";
  oracle::write_file(bad, R"({"problem": "loglinear", "bogus": 1})");
  const auto unknown = oracle::run_cmd(bin + " run --manifest " + bad +
                                       " --solver md 2>/dev/null");
  CHECK(unknown.status == 2);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
  CHECK(oracle::run_cmd(bin + " --help").status == 0);
  CHECK(oracle::run_cmd(bin + " 2>/dev/null").status == 2);
  CHECK(oracle::run_cmd(bin + " run --solver md 2>/dev/null").status == 2);
  CHECK(oracle::run_cmd(bin +
                        " run --problem loglinear --solver md --bogus-flag"
                        " 2>/dev/null")
            .status == 2);
  CHECK(oracle::run_cmd(bin +
                        " run --problem lasso --rows 4 --dim 8 --solver md"
                        " 2>/dev/null")
            .status == 2);  // missing --lambda
}

TEST_CASE("logging goes to stderr and leaves stdout alone", "[cli]") {
  const auto dir = work_dir();
  const std::string cmd = bin +
                          " run --problem loglinear --dim 8 --seed 3"
                          " --solver accmd-forward --no-timing";
  const auto quiet = oracle::run_cmd(cmd + " 2>" + dir + "/quiet.err");
  const auto chatty =
      oracle::run_cmd("ACCMD_LOG=info " + cmd + " 2>" + dir + "/info.err");
  REQUIRE(quiet.status == 0);
  REQUIRE(chatty.status == 0);
  CHECK(quiet.out == chatty.out);
  CHECK(oracle::read_file(dir + "/quiet.err").empty());
  const auto err = oracle::read_file(dir + "/info.err");
  CHECK(err.find("[accmd]") != std::string::npos);
}
