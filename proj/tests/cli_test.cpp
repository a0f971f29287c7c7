//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "molmetric/cli.hpp"
#include "molmetric/frechet.hpp"

using namespace molmetric;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "molmetric");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "molmetric_cli_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_smi(const std::filesystem::path& dir) {
  const auto path = dir / "a.smi";
  std::ofstream(path) << "CCO\nc1ccccc1\nCC(=O)O\nCCN(CC)CC\nC1CCCCC1\nOc1ccccc1\nCC#N\n"
                         "CC(C)O\nC1=CC=CN=C1\nCOC\nC(\n";
  return path.string();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fcd of a set with itself is zero") {
  const auto dir = temp_dir("self");
  const std::string a = write_smi(dir);
  const Result r = run({"fcd", a, a, "--seeded-model", "7"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["fcd"].get<double>() <= 1e-8);
  CHECK(j["a"]["n"] == 11);
  CHECK(j["a"]["validity"].get<double>() == doctest::Approx(10.0 / 11.0));
}

TEST_CASE("missing input exits 1 and names the path") {
  const auto dir = temp_dir("missing");
  const std::string b = write_smi(dir);
  const Result r = run({"fcd", "missing.smi", b});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("missing.smi") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("baseline is deterministic JSON") {
  const Result a = run({"baseline", "-n", "3", "--seed", "1"});
  const Result b = run({"baseline", "-n", "3", "--seed", "1"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  REQUIRE(j["smiles"].size() == 3);
  for (const auto& s : j["smiles"]) {
    CHECK(s.get<std::string>().find_first_not_of("CNO") == std::string::npos);
  }
  CHECK(run({"baseline", "-n", "3", "--seed", "2"}).out != a.out);
}

TEST_CASE("usage errors exit 64") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"nonsense"}).code == cli::kExitUsage);
  CHECK(run({"fcd", "only-one.smi"}).code == cli::kExitUsage);
  CHECK(run({"baseline"}).code == cli::kExitUsage);
  const auto dir = temp_dir("usage");
  const std::string a = write_smi(dir);
  // No model given.
  const Result r = run({"fcd", a, a});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("--seeded-model") != std::string::npos);
  CHECK(run({"fcd", a, a, "--seeded-model", "1", "--model", a}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("commands print parseable JSON") {
  const auto dir = temp_dir("json");
  const std::string a = write_smi(dir);
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"ffd", a, a},
           {"validity", a},
           {"diversity", a, "--subset", "5"},
           {"stats", a, "--seeded-model", "3", "-o", (dir / "a.stats").string()}}) {
    const Result r = run(args);
    CAPTURE(args[0]);
    REQUIRE(r.code == 0);
    CHECK_NOTHROW(nlohmann::json::parse(r.out));
  }
  const auto v = nlohmann::json::parse(run({"validity", a}).out);
  CHECK(v["valid"] == 10);
  CHECK(v["errors"]["UnclosedBranch"] == 1);
  CHECK(nlohmann::json::parse(run({"ffd", a, a}).out)["ffd"].get<double>() <= 1e-8);

  // A saved reference scores the same as the set it came from.
  const Result s = run({"fcd", a, (dir / "a.stats").string(), "--seeded-model", "3"});
  REQUIRE(s.code == 0);
  CHECK(nlohmann::json::parse(s.out)["fcd"].get<double>() <= 1e-8);
}

TEST_CASE("numerical failures exit 2") {
  const auto dir = temp_dir("numerical");
  frechet::GaussianStats<double> pos{Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4),
                                     10};
  frechet::GaussianStats<double> neg = pos;
  neg.cov *= -1.0;
  frechet::save_stats(dir / "pos.stats", pos);
  frechet::save_stats(dir / "neg.stats", neg);
  const Result r = run({"fcd", (dir / "pos.stats").string(), (dir / "neg.stats").string(),
                        "--seeded-model", "1"});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.err.find("NotPSD") != std::string::npos);
}

TEST_CASE("unreadable and corrupt inputs exit 1") {
  const auto dir = temp_dir("corrupt");
  std::ofstream(dir / "bad.stats") << "{ not json";
  const std::string a = write_smi(dir);
  CHECK(run({"fcd", a, (dir / "bad.stats").string(), "--seeded-model", "1"}).code ==
        cli::kExitInput);
  std::ofstream(dir / "empty.smi") << "\n";
  CHECK(run({"validity", (dir / "empty.smi").string()}).code == cli::kExitInput);
  CHECK(run({"fcd", a, a, "--model", (dir / "nope.json").string()}).code == cli::kExitInput);
}

}  // TEST_SUITE
