#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ringmod/errors.hpp"
#include "ringmod/scenario.hpp"

using namespace ringmod;
using namespace ringmod::scenario;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = RINGMOD_SCENARIO_DIR;
const fs::path kFixtures = RINGMOD_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ringmod_test_scenario_" + name);
  fs::remove_all(dir);
  return dir;
}

// Data rows of a report: lines that are neither comments nor the column header.
std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  bool header = true;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string parse_failure(const std::string& text) {
  try {
    parse_scenario(text, "x");
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse: every committed scenario parses") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const Scenario s = parse_scenario(slurp(entry.path()), entry.path().stem().string());
    CHECK(std::find(scenario_kinds().begin(), scenario_kinds().end(), s.kind) != scenario_kinds().end());
    ++count;
  }
  CHECK(count >= 7);
}

TEST_CASE("parse: field-level diagnostics") {
  CHECK(parse_failure(R"({"kind": "ring_modulous", "parameters": {}})").find("scenario.kind") != std::string::npos);
  CHECK(parse_failure(R"({"kind": "ring_modulus", "parameters": {"n": 2, "p": 2, "r1": 1}})").find("parameters.r2") !=
        std::string::npos);
  CHECK(parse_failure(R"({"kind": "ring_modulus", "parameters": {"n": 2.5, "p": 2, "r1": 1, "r2": 2}})")
            .find("parameters.n: expected an integer") != std::string::npos);
  CHECK(parse_failure(R"({"kind": "ring_modulus", "parameters": {"n": 2, "p": 2, "r1": 1, "r2": 2, "r3": 4}})")
            .find("parameters.r3: unknown field") != std::string::npos);
  CHECK(parse_failure(R"({"kind": "ring_modulus"})").find("scenario.parameters") != std::string::npos);
  CHECK(parse_failure(R"({"kind": "divergence_probe", "parameters": {"n": 2, "p": 2, "profile": {"kind": "bump"}}})")
            .find("parameters.profile.kind") != std::string::npos);
  CHECK(parse_failure(R"({"kind": "theorem3_counterexample", "parameters": {"n": 2, "p": 2,
        "profile": {"kind": "constant", "c": 1}, "continuum": [[0, 0], [0.1, "x"]], "a": [0.9, 0], "b": [-0.9, 0],
        "m_list": [2]}})")
            .find("parameters.continuum[1][1]") != std::string::npos);
  CHECK(parse_failure("{ not json").find("invalid JSON") != std::string::npos);
  CHECK(parse_failure(R"({"kind": "ring_modulus", "parameters": {"n": 2, "p": 2, "r1": 1, "r2": "inf"}})").empty());
}

TEST_CASE("run: ring modulus of 1 < |x| < e is 2 pi") {
  const fs::path out = scratch("ring");
  const Scenario s = parse_scenario(slurp(kScenarios / "ring_modulus.json"), "ring_modulus");
  const RunResult r = run_scenario(s, {.seed = {}, .out_dir = out});
  REQUIRE(fs::exists(out / "ring_modulus.csv"));
  const auto rows = data_rows(r.csv);
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(std::stod(rows[0][5]) - 2.0 * std::numbers::pi) <= 1e-10);
  CHECK(r.csv.find("# seed: 1\n") != std::string::npos);
  CHECK(r.csv.find("# parameters.r1: 1.0\n") != std::string::npos);
}

TEST_CASE("run: seed override is echoed in the header") {
  const fs::path out = scratch("seed");
  const Scenario s = parse_scenario(slurp(kScenarios / "fmo_probe.json"), "fmo_probe");
  const RunResult a = run_scenario(s, {.seed = 99, .out_dir = out});
  CHECK(a.csv.find("# seed: 99\n") != std::string::npos);
  const RunResult b = run_scenario(s, {.seed = 99, .out_dir = out});
  CHECK(a.csv == b.csv);
}

TEST_CASE("run: collapse fixture has a strictly decreasing first column and a constant second") {
  const fs::path out = scratch("t3");
  const Scenario s = parse_scenario(slurp(kScenarios / "collapse_counterexample.json"), "t3");
  const RunResult r = run_scenario(s, {.seed = {}, .out_dir = out});
  CHECK(fs::exists(out / "t3.svg"));
  const auto rows = data_rows(r.csv);
  REQUIRE(rows.size() == 10);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][1]) < std::stod(rows[i - 1][1]));
    CHECK(rows[i][2] == rows[0][2]);
  }
}

TEST_CASE("run: output prefix may name a subdirectory") {
  const fs::path out = scratch("prefix");
  Scenario s = parse_scenario(slurp(kScenarios / "divergence_probe.json"), "x");
  s.output = "nested/probe";
  const RunResult r = run_scenario(s, {.seed = {}, .out_dir = out});
  CHECK(r.files.front() == out / "nested" / "probe.csv");
  CHECK(fs::exists(out / "nested" / "probe.csv"));
}

TEST_CASE("run_file: exit statuses") {
  const fs::path out = scratch("exit");
  std::ostringstream err;
  RunOptions opts;
  opts.out_dir = out;
  CHECK(run_file(kScenarios / "ring_modulus.json", opts, err) == kExitOk);
  CHECK(run_file(kFixtures / "unknown_kind.json", opts, err) == kExitParse);
  CHECK(run_file(kFixtures / "missing_field.json", opts, err) == kExitParse);
  CHECK(run_file(kFixtures / "broken.json", opts, err) == kExitParse);
  CHECK(run_file(kFixtures / "no_such_file.json", opts, err) == kExitParse);
  CHECK(run_file(kFixtures / "bad_radii.json", opts, err) == kExitValidation);
  CHECK(run_file(kFixtures / "refused_collapse.json", opts, err) == kExitValidation);
  err.str("");
  CHECK(run_file(kFixtures / "failing_contract.json", opts, err) == kExitContract);
  CHECK(err.str().find("contract failure") != std::string::npos);
  // The report is still written when the contract fails.
  CHECK(fs::exists(out / "failing_contract.csv"));
}
