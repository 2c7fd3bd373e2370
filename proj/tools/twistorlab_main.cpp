#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "twistorlab/scenario.hpp"

namespace {

std::pair<int, int> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x != std::string::npos) {
    try {
      std::size_t ua = 0, ub = 0;
      const int a = std::stoi(s.substr(0, x), &ua);
      const int b = std::stoi(s.substr(x + 1), &ub);
      if (ua == x && ub == s.size() - x - 1 && a > 0 && b > 0) return {a, b};
    } catch (const std::exception&) {
    }
  }
  throw CLI::ValidationError("--grid", "expected NxM with positive integers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scattering and twistor-map laboratory on the unit disk"};
  app.require_subcommand(1);

  auto* run_cmd =
      app.add_subcommand("run", "run one scenario and print its checks");
  std::string scenario;
  std::vector<std::string> metrics;
  std::string lambda, tau, grid, out;
  double tol = 0.0;
  std::uint64_t seed = 20260815;
  int count = 0;
  bool canonical = false;
  run_cmd->add_option("scenario", scenario, "scenario id, see `list`")
      ->required();
  run_cmd->add_option("--metric", metrics,
                      "conformal metric spec, repeatable (e.g. bump:0.3:0.5)");
  run_cmd->add_option("--lambda", lambda,
                      "thermostat coefficient spec (zero, const:C, conf:...)");
  run_cmd->add_option("--tau", tau, "time-change spec (zero, radquad:S)");
  run_cmd->add_option("--grid", grid, "scattering grid as NxM");
  run_cmd->add_option("--tol", tol, "tolerance override");
  run_cmd->add_option("--seed", seed, "seed of the deterministic draw stream");
  run_cmd->add_option("--count", count, "sample count override");
  run_cmd->add_option("--out", out, "directory for JSON/CSV/SVG reports");
  run_cmd->add_flag("--canonical", canonical,
                    "byte-reproducible reports: no timestamps or runtimes");

  auto* suite_cmd =
      app.add_subcommand("suite", "run every *.json config in a directory");
  std::string cfg_dir, suite_out;
  suite_cmd->add_option("dir", cfg_dir, "config directory")->required();
  suite_cmd->add_option("--out", suite_out, "directory for reports");

  auto* list_cmd = app.add_subcommand("list", "print the scenario registry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      for (const auto& e : twistorlab::scenario_registry()) {
        std::printf("%-24s %s\n", e.id.c_str(), e.summary.c_str());
      }
      return 0;
    }
    if (*run_cmd) {
      twistorlab::ScenarioConfig cfg;
      cfg.scenario = scenario;
      cfg.metrics = metrics;
      cfg.lambda = lambda;
      cfg.tau = tau;
      if (!grid.empty()) {
        std::tie(cfg.grid_beta, cfg.grid_gamma) = parse_grid(grid);
      }
      cfg.tol = tol;
      cfg.count = count;
      cfg.seed = seed;
      cfg.out_dir = out;
      cfg.canonical = canonical;
      const twistorlab::ScenarioReport report = twistorlab::run_scenario(cfg);
      std::cout << report.to_text();
      return report.pass ? 0 : 1;
    }
    const twistorlab::SuiteResult res =
        twistorlab::run_suite(cfg_dir, suite_out, std::cout);
    return res.all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
