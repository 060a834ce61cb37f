#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "accmd/dataset.hpp"
#include "accmd/rng.hpp"
#include "oracles.hpp"

using namespace accmd;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("accmd_dataset_" + name))
      .string();
}

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("csv fixture loads with header detection", "[dataset]") {
  const auto ds = load_dataset_csv(std::string(ACCMD_FIXTURES) + "/tiny.csv");
  REQUIRE(ds.rows() == 3);
  REQUIRE(ds.cols() == 2);
  CHECK(ds.response == Vector{1.0, 0.0, -1.0});
  CHECK(ds.features(0, 0) == 0.5);
  CHECK(ds.features(0, 1) == -2.0);
  CHECK(ds.features(1, 0) == 1.25);
  CHECK(ds.features(1, 1) == 3.5);
  CHECK(ds.features(2, 0) == 0.0);
  CHECK(ds.features(2, 1) == 4.0);
}

TEST_CASE("csv without a header row parses from the first line", "[dataset]") {
  const auto path = temp_path("noheader.csv");
  oracle::write_file(path, "1,2,3\n4,5,6\n");
  const auto ds = load_dataset_csv(path);
  REQUIRE(ds.rows() == 2);
  REQUIRE(ds.cols() == 2);
  CHECK(ds.response == Vector{1.0, 4.0});
  CHECK(ds.features(1, 1) == 6.0);
}

TEST_CASE("svmlight rows expand sparse indices", "[dataset]") {
  const auto path = temp_path("sparse.svm");
  oracle::write_file(path, "1 3:0.5\n");
  const auto ds = load_dataset_svmlight(path, 4);
  REQUIRE(ds.rows() == 1);
  REQUIRE(ds.cols() == 4);
  CHECK(ds.response == Vector{1.0});
  CHECK(ds.features(0, 0) == 0.0);
  CHECK(ds.features(0, 1) == 0.0);
  CHECK(ds.features(0, 2) == 0.5);
  CHECK(ds.features(0, 3) == 0.0);

  // Without a declared width the largest index fixes the dimension.
  const auto inferred = load_dataset_svmlight(path);
  CHECK(inferred.cols() == 3);

  const auto dispatched = load_dataset(path, DataFormat::svmlight, 4);
  CHECK(dispatched.cols() == 4);
}

TEST_CASE("save and reload reproduce the dataset exactly", "[dataset]") {
  Rng rng(17);
  DenseMatrix a(10, 20);
  for (auto& t : a.a) t = rng.gaussian();
  a(3, 7) = 0.0;
  Vector b(10);
  for (auto& t : b) t = rng.gaussian();

  const auto csv = temp_path("round.csv");
  save_dataset_csv(csv, a, b);
  CHECK(oracle::read_file(csv).rfind("b,f1,f2,", 0) == 0);
  const auto back = load_dataset_csv(csv);
  REQUIRE(back.rows() == 10);
  REQUIRE(back.cols() == 20);
  CHECK(back.features.a == a.a);
  CHECK(back.response == b);

  const auto svm = temp_path("round.svm");
  save_dataset_svmlight(svm, a, b);
  const auto back2 = load_dataset_svmlight(svm, 20);
  CHECK(back2.features.a == a.a);
  CHECK(back2.response == b);

  save_dataset(csv, a, b, DataFormat::csv);
  const auto back3 = load_dataset(csv, DataFormat::csv);
  CHECK(back3.features.a == a.a);
}

TEST_CASE("parse failures carry the line number", "[dataset]") {
  const auto path = temp_path("bad.csv");
  oracle::write_file(path, "b,f1,f2\n1,2,3\n1,2,notanumber\n");
  CHECK_THROWS_AS(load_dataset_csv(path), config_error);
  const auto msg = thrown_message([&] { load_dataset_csv(path); });
  CHECK(msg.find(":3:") != std::string::npos);
}

TEST_CASE("malformed datasets are rejected", "[dataset]") {
  const auto ragged = temp_path("ragged.csv");
  oracle::write_file(ragged, "b,f1,f2\n1,2,3\n1,2\n");
  CHECK_THROWS_AS(load_dataset_csv(ragged), config_error);

  const auto narrow = temp_path("narrow.csv");
  oracle::write_file(narrow, "5\n");
  CHECK_THROWS_AS(load_dataset_csv(narrow), config_error);

  const auto empty = temp_path("empty.csv");
  oracle::write_file(empty, "b,f1,f2\n");
  CHECK_THROWS_AS(load_dataset_csv(empty), config_error);

  const auto dup = temp_path("dup.svm");
  oracle::write_file(dup, "1 2:1 2:3\n");
  CHECK_THROWS_AS(load_dataset_svmlight(dup), config_error);

  const auto wide = temp_path("wide.svm");
  oracle::write_file(wide, "1 7:1.0\n");
  CHECK_THROWS_AS(load_dataset_svmlight(wide, 4), config_error);

  CHECK_THROWS_AS(load_dataset_csv(temp_path("does_not_exist.csv")), io_error);
}

TEST_CASE("save guards", "[dataset]") {
  DenseMatrix a(2, 2);
  CHECK_THROWS_AS(save_dataset_csv(temp_path("mismatch.csv"), a, Vector(3)),
                  usage_error);
  CHECK_THROWS_AS(
      save_dataset_csv("/nonexistent-dir-accmd/out.csv", a, Vector(2)),
      io_error);
}
