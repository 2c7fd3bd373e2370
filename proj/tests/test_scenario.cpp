#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "twistorlab/scenario.hpp"

using namespace twistorlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("twistorlab-test-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("the registry lists distinct documented scenarios") {
  const auto& reg = scenario_registry();
  CHECK(reg.size() == 13);
  std::set<std::string> ids;
  for (const auto& info : reg) {
    CHECK_FALSE(info.id.empty());
    CHECK_FALSE(info.summary.empty());
    ids.insert(info.id);
  }
  CHECK(ids.size() == reg.size());
  CHECK(ids.count("euclid-chord") == 1);
  CHECK(ids.count("scattering-involution") == 1);
}

TEST_CASE("configs round trip through JSON and reject unknown scenarios") {
  ScenarioConfig cfg;
  cfg.scenario = "euclid-chord";
  cfg.metrics = {"zero", "const:0.3"};
  cfg.lambda = "const:0.2";
  cfg.grid_beta = 12;
  cfg.grid_gamma = 8;
  cfg.tol = 1e-7;
  cfg.seed = 99;
  cfg.canonical = true;
  nlohmann::json j = cfg;
  const auto back = j.get<ScenarioConfig>();
  CHECK(back.scenario == cfg.scenario);
  CHECK(back.metrics == cfg.metrics);
  CHECK(back.lambda == cfg.lambda);
  CHECK(back.grid_beta == 12);
  CHECK(back.grid_gamma == 8);
  CHECK(back.tol == cfg.tol);
  CHECK(back.seed == 99);
  CHECK(back.canonical);

  nlohmann::json bad = {{"scenario", "no-such-thing"}};
  CHECK_THROWS_AS(bad.get<ScenarioConfig>(), SpecParseError);
  nlohmann::json empty = nlohmann::json::object();
  CHECK_THROWS_AS(empty.get<ScenarioConfig>(), SpecParseError);
}

TEST_CASE("load_config reports the offending file") {
  const auto dir = fresh_dir("load");
  const auto path = (dir / "broken.json").string();
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_config(path), SpecParseError);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()),
                  SpecParseError);
  const auto good = (dir / "good.json").string();
  std::ofstream(good) << R"({"scenario": "euclid-chord", "seed": 5})";
  const auto cfg = load_config(good);
  CHECK(cfg.scenario == "euclid-chord");
  CHECK(cfg.seed == 5);
}

TEST_CASE("a small flat-disk scattering run passes") {
  ScenarioConfig cfg;
  cfg.scenario = "euclid-chord";
  cfg.grid_beta = 12;
  cfg.grid_gamma = 8;
  cfg.canonical = true;
  const auto report = run_scenario(cfg);
  CHECK(report.pass);
  CHECK_FALSE(report.checks.empty());
  CHECK(report.scenario == "euclid-chord");
  // Canonical reports carry no wall-clock state.
  const auto j = report.to_json();
  CHECK_FALSE(j.contains("timestamp"));
  CHECK_FALSE(j.contains("runtime_seconds"));
  CHECK(j.at("version").get<std::string>() == kVersionString);
  // The text rendering carries one line per check.
  std::stringstream text(report.to_text());
  std::string line;
  int lines = 0;
  while (std::getline(text, line)) ++lines;
  CHECK(lines >= static_cast<int>(report.checks.size()));
  CHECK(report.to_text().find("pass") != std::string::npos);
}

TEST_CASE("unattainable tolerances fail without throwing") {
  ScenarioConfig cfg;
  cfg.scenario = "euclid-chord";
  cfg.grid_beta = 8;
  cfg.grid_gamma = 6;
  cfg.tol = 1e-30;
  cfg.canonical = true;
  const auto report = run_scenario(cfg);
  CHECK_FALSE(report.pass);
}

TEST_CASE("unknown scenario ids are rejected at run time") {
  // Built directly, bypassing from_json, to exercise run_scenario's check.
  ScenarioConfig cfg;
  cfg.scenario = "not-registered";
  CHECK_THROWS_AS(run_scenario(cfg), SpecParseError);
}

TEST_CASE("canonical reports are byte identical across runs") {
  for (const char* id : {"euclid-chord", "moebius-rigidity"}) {
    CAPTURE(id);
    ScenarioConfig cfg;
    cfg.scenario = id;
    cfg.grid_beta = 8;
    cfg.grid_gamma = 6;
    cfg.count = 16;
    cfg.canonical = true;
    const auto a = run_scenario(cfg).to_json().dump();
    const auto b = run_scenario(cfg).to_json().dump();
    CHECK(a == b);
  }
}

TEST_CASE("reports and side files land in the output directory") {
  const auto dir = fresh_dir("out");
  ScenarioConfig cfg;
  cfg.scenario = "euclid-chord";
  cfg.grid_beta = 8;
  cfg.grid_gamma = 6;
  cfg.out_dir = dir.string();
  cfg.canonical = true;
  const auto report = run_scenario(cfg);
  CHECK(report.pass);
  CHECK(fs::exists(dir / "euclid-chord.json"));
  // The written report parses back to the same content.
  std::ifstream in(dir / "euclid-chord.json");
  nlohmann::json j;
  in >> j;
  CHECK(j.at("scenario").get<std::string>() == "euclid-chord");
  CHECK(j.at("pass").get<bool>());
  // At least one side table accompanies the report.
  int extras = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() != "euclid-chord.json") ++extras;
  }
  CHECK(extras > 0);
}

TEST_CASE("suites aggregate pass and fail rows") {
  const auto cfgdir = fresh_dir("suite-cfg");
  const auto outdir = fresh_dir("suite-out");
  std::ofstream(cfgdir / "01-ok.json")
      << R"({"scenario": "euclid-chord", "grid": [8, 6], "canonical": true})";
  std::ofstream(cfgdir / "02-tight.json")
      << R"({"scenario": "euclid-chord", "grid": [8, 6], "tol": 1e-30,
             "canonical": true})";
  std::stringstream log;
  const auto suite = run_suite(cfgdir.string(), outdir.string(), log);
  REQUIRE(suite.rows.size() == 2);
  CHECK(suite.rows[0].config_file.find("01-ok.json") != std::string::npos);
  CHECK(suite.rows[0].pass);
  CHECK_FALSE(suite.rows[1].pass);
  CHECK_FALSE(suite.all_pass);
  CHECK(fs::exists(outdir / "summary.json"));
  CHECK(log.str().find("euclid-chord") != std::string::npos);

  // An unreadable config is a failed row, not a crash.
  std::ofstream(cfgdir / "03-broken.json") << "{ nope";
  std::stringstream log2;
  const auto suite2 = run_suite(cfgdir.string(), outdir.string(), log2);
  REQUIRE(suite2.rows.size() == 3);
  CHECK_FALSE(suite2.rows[2].pass);
  CHECK_FALSE(suite2.rows[2].note.empty());
}

TEST_CASE("an empty suite directory passes vacuously") {
  const auto cfgdir = fresh_dir("suite-empty");
  std::stringstream log;
  const auto suite = run_suite(cfgdir.string(), "", log);
  CHECK(suite.rows.empty());
  CHECK(suite.all_pass);
}
