#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "dsekit/report.hpp"

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + DSEKIT_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool same_bytes(const std::string& a, const std::string& b) {
  return dsekit::read_text_file(a) == dsekit::read_text_file(b);
}

}  // namespace

TEST_CASE("the estimate command writes its artifacts and replays exactly") {
  namespace fs = std::filesystem;
  const std::string dir = "cli_tmp/est";
  const std::string dir2 = "cli_tmp/est_replay";
  fs::remove_all("cli_tmp");

  REQUIRE(run_cli("estimate --case ieee14 --scenario 1 --trials 2 --horizon 5 "
                  "--filters ukf,ckmmc-ukf --seed 3 --out " + dir) == 0);
  for (const char* name : {"report.csv", "armse_curves.csv", "summary.json",
                           "timing.json", "manifest.json"})
    CHECK(fs::exists(dir + "/" + name));

  const auto summary =
      nlohmann::json::parse(dsekit::read_text_file(dir + "/summary.json"));
  CHECK(summary.at("trials_used") == 2);
  CHECK(summary.at("filters").contains("ukf"));
  CHECK(summary.at("filters").at("ukf").at("phase_armse").is_number());

  // Replaying the manifest with a different worker count must reproduce the
  // deterministic artifacts byte for byte.
  REQUIRE(run_cli("estimate --from-manifest " + dir + "/manifest.json "
                  "--jobs 2 --out " + dir2) == 0);
  CHECK(same_bytes(dir + "/report.csv", dir2 + "/report.csv"));
  CHECK(same_bytes(dir + "/armse_curves.csv", dir2 + "/armse_curves.csv"));
  CHECK(same_bytes(dir + "/summary.json", dir2 + "/summary.json"));
}

TEST_CASE("bad invocations exit nonzero") {
  CHECK(run_cli("estimate --no-such-flag 1") != 0);
  CHECK(run_cli("estimate --case nope --trials 1 --horizon 2 "
                "--out cli_tmp/bad") != 0);
  CHECK(run_cli("") != 0);  // a subcommand is required
  CHECK(run_cli("estimate --case ieee14 --scenario 9 --out cli_tmp/bad2") != 0);
}

TEST_CASE("the optimizer benchmark command writes both tables") {
  namespace fs = std::filesystem;
  const std::string dir = "cli_tmp/bench";
  REQUIRE(run_cli("benchopt --functions F1,F18 --optimizers bwb,pso "
                  "--seeds 2 --iters 5 --agents 5 --seed 1 --out " + dir) == 0);
  CHECK(fs::exists(dir + "/benchopt.csv"));
  CHECK(fs::exists(dir + "/curves.csv"));
  CHECK(fs::exists(dir + "/manifest.json"));
  const std::string table = dsekit::read_text_file(dir + "/benchopt.csv");
  CHECK(table.find("F1,bwb,") != std::string::npos);
  CHECK(table.find("F18,pso,") != std::string::npos);
}

TEST_CASE("the tune command reports a search no worse than the defaults") {
  namespace fs = std::filesystem;
  const std::string dir = "cli_tmp/tune";
  REQUIRE(run_cli("tune --case ieee14 --scenario 1 --variant ukf --agents 2 "
                  "--iters 1 --fit-trials 1 --fit-horizon 3 --seed 1 "
                  "--out " + dir) == 0);
  const auto coeffs =
      nlohmann::json::parse(dsekit::read_text_file(dir + "/coefficients.json"));
  CHECK(coeffs.at("variant") == "ukf");
  CHECK(coeffs.at("objective").get<double>() <=
        coeffs.at("default_objective").get<double>());
  CHECK(fs::exists(dir + "/history.csv"));
  fs::remove_all("cli_tmp");
}
