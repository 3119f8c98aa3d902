#include <catch2/catch.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pddid/cli.hpp"
#include "support.hpp"

using namespace pddid;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pddid_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

int run(std::vector<std::string> args) { return run_cli(std::move(args)); }

constexpr const char* kMinimalCsv =
    "unit_id,group_id,arm,time,outcome\n"
    "u1,gR,R,50,0\n"
    "u2,gR,R,300,1\n"
    "u3,gI,I,50,0\n"
    "u4,gI,I,300,3\n";

}  // namespace

TEST_CASE("cli: simulate then fit, end to end") {
  const fs::path csv = temp_file("sim.csv");
  const fs::path json = temp_file("fit.json");
  REQUIRE(run({"simulate", "--seed", "7", "--gamma", "0", "--l", "0.2", "--rho", "0.5", "-o",
               csv.string()}) == 0);
  REQUIRE(run({"fit", csv.string(), "--method", "detrending", "--cutoff", "182", "-o",
               json.string()}) == 0);
  const nlohmann::json doc = nlohmann::json::parse(oracle::slurp(json.string()));
  CHECK(doc["kind"] == "did_estimate");
  CHECK(doc["payload"]["method"] == "detrending");
  // true effect is zero; the detrending estimate should be near it
  CHECK(std::fabs(doc["payload"]["gamma_hat"].get<double>()) < 0.2);
}

TEST_CASE("cli: fit on the 4-row fixture reproduces the cell-means effect") {
  const fs::path csv = temp_file("minimal.csv");
  const fs::path json = temp_file("minimal.json");
  write_file(csv, kMinimalCsv);
  REQUIRE(run({"fit", csv.string(), "--cutoff", "182", "-o", json.string()}) == 0);
  const nlohmann::json doc = nlohmann::json::parse(oracle::slurp(json.string()));
  CHECK(doc["payload"]["gamma_hat"].get<double>() == Approx(2.0).margin(1e-10));
  CHECK(doc["payload"]["p_value"].get<double>() == 1.0);  // saturated: no residual df
}

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run({"fit", "nope.csv", "--cutoff", "10", "--frobnicate"}) == 2);
  CHECK(run({"fit", "nope.csv"}) == 2);               // --cutoff is required
  CHECK(run({"bogus-subcommand"}) == 2);
  CHECK(run({}) == 2);                                // a subcommand is required
  CHECK(run({"--help"}) == 0);
  CHECK(run({"simulate", "--help"}) == 0);
}

TEST_CASE("cli: runtime errors exit 1") {
  CHECK(run({"fit", "/nonexistent/file.csv", "--cutoff", "10"}) == 1);
  const fs::path csv = temp_file("badarm.csv");
  write_file(csv, "unit_id,group_id,arm,time,outcome\nu1,g,X,1,1\n");
  CHECK(run({"fit", csv.string(), "--cutoff", "0.5"}) == 1);
}

TEST_CASE("cli: permtest writes the documented JSON") {
  const fs::path csv = temp_file("perm.csv");
  const fs::path json = temp_file("perm.json");
  REQUIRE(run({"simulate", "--seed", "11", "--n-per-group", "25", "-o", csv.string()}) == 0);
  REQUIRE(run({"permtest", csv.string(), "--cutoff", "182", "--m", "99", "--seed", "5", "-o",
               json.string()}) == 0);
  const nlohmann::json doc = nlohmann::json::parse(oracle::slurp(json.string()));
  CHECK(doc["kind"] == "pd_did_result");
  CHECK(doc["payload"]["m"].get<int>() == 99);
  CHECK(doc["payload"]["p_value"].get<double>() > 0.0);
  CHECK(doc["seed_info"]["seed"].get<int>() == 5);
}

TEST_CASE("cli: permtest is byte-reproducible across thread counts") {
  const fs::path csv = temp_file("perm_det.csv");
  REQUIRE(run({"simulate", "--seed", "21", "--n-per-group", "20", "-o", csv.string()}) == 0);
  const fs::path out1 = temp_file("perm_t1.json");
  const fs::path out4 = temp_file("perm_t4.json");

  setenv("PDDID_THREADS", "1", 1);
  REQUIRE(run({"permtest", csv.string(), "--cutoff", "182", "--m", "64", "--seed", "9", "-o",
               out1.string()}) == 0);
  setenv("PDDID_THREADS", "4", 1);
  REQUIRE(run({"permtest", csv.string(), "--cutoff", "182", "--m", "64", "--seed", "9", "-o",
               out4.string()}) == 0);
  unsetenv("PDDID_THREADS");
  CHECK(oracle::slurp(out1.string()) == oracle::slurp(out4.string()));
}

TEST_CASE("cli: binomial family fit") {
  const fs::path csv = temp_file("binary.csv");
  std::string body = "unit_id,group_id,arm,time,outcome,z_age\n";
  Rng rng(37);
  int unit = 0;
  for (int arm = 0; arm < 2; ++arm) {
    for (int i = 0; i < 40; ++i) {
      const double t = 1.0 + static_cast<double>(rng.bounded(365));
      const int y = rng.uniform01() < 0.5 ? 1 : 0;
      const double age = 40.0 + 10.0 * rng.normal();
      body += "u" + std::to_string(++unit) + "," + (arm ? "gI" : "gR") + "," + (arm ? "I" : "R") +
              "," + std::to_string(t) + "," + std::to_string(y) + "," + std::to_string(age) + "\n";
    }
  }
  // anchor all four cells
  body += "a1,gR,R,10,0,50\na2,gR,R,350,1,50\na3,gI,I,10,1,50\na4,gI,I,350,0,50\n";
  write_file(csv, body);
  const fs::path json = temp_file("binary.json");
  REQUIRE(run({"fit", csv.string(), "--cutoff", "182", "--family", "binomial", "-o",
               json.string()}) == 0);
  const nlohmann::json doc = nlohmann::json::parse(oracle::slurp(json.string()));
  CHECK(doc["payload"]["family"] == "binomial");
  CHECK(doc["payload"]["include_covariates"].get<bool>());
  CHECK(doc["payload"]["converged"].get<bool>());
}

TEST_CASE("cli: experiment writes CSV, JSON, and a chart") {
  const fs::path csv = temp_file("report.csv");
  const fs::path json = temp_file("report.json");
  const fs::path svg = temp_file("report.svg");
  REQUIRE(run({"experiment", "--gammas", "0,0.4", "--ls", "0", "--rhos", "0", "--replications",
               "8", "--m", "39", "--n-per-group", "12", "--master-seed", "5", "-o", csv.string(),
               "--json", json.string(), "--chart", svg.string()}) == 0);

  const std::string report_csv = oracle::slurp(csv.string());
  CHECK(report_csv.rfind("gamma,l,rho,method,mean_estimate,bias,rejection_rate,replications,"
                         "failures\n",
                         0) == 0);
  CHECK(oracle::count_occurrences(report_csv, "\n") == 1 + 2 * 3);  // 2 cells x 3 methods

  const nlohmann::json doc = nlohmann::json::parse(oracle::slurp(json.string()));
  CHECK(doc["payload"]["rows"].size() == 6);

  std::string why;
  CHECK(oracle::xml_well_formed(oracle::slurp(svg.string()), &why));
  INFO(why);
}

TEST_CASE("cli: paper-grid preset applies only where flags are absent") {
  const fs::path csv = temp_file("full_grid.csv");
  // explicit tiny overrides keep this runnable; the preset fills the rest
  REQUIRE(run({"experiment", "--full-grid", "--ls", "0", "--rhos", "0", "--replications", "3",
               "--m", "39", "--n-per-group", "8", "--methods", "detrending", "--master-seed", "2",
               "-o", csv.string()}) == 0);
  const std::string body = oracle::slurp(csv.string());
  // preset gammas = {0}: one cell, one method row
  CHECK(oracle::count_occurrences(body, "\n") == 2);
  CHECK(body.find(",3,") != std::string::npos);  // replications stayed at the override
}

TEST_CASE("cli: experiment output is byte-reproducible across thread counts") {
  const fs::path out1 = temp_file("report_t1.csv");
  const fs::path out4 = temp_file("report_t4.csv");
  const std::vector<std::string> base{"experiment", "--gammas",      "0",  "--ls",
                                      "0,0.2",      "--rhos",        "0",  "--replications",
                                      "6",          "--m",           "39", "--n-per-group",
                                      "10",         "--master-seed", "3"};
  auto with_output = [&](const fs::path& p) {
    std::vector<std::string> args = base;
    args.push_back("-o");
    args.push_back(p.string());
    return args;
  };
  setenv("PDDID_THREADS", "1", 1);
  REQUIRE(run(with_output(out1)) == 0);
  setenv("PDDID_THREADS", "4", 1);
  REQUIRE(run(with_output(out4)) == 0);
  unsetenv("PDDID_THREADS");
  CHECK(oracle::slurp(out1.string()) == oracle::slurp(out4.string()));
}
