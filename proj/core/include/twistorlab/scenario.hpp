#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twistorlab/util.hpp"

namespace twistorlab {

inline constexpr const char* kVersionString = "twistorlab 0.1.0";

// One experiment request. Empty metrics / zero grid entries mean "use the
// scenario's own defaults"; tol = 0 likewise.
struct ScenarioConfig {
  std::string scenario;
  std::vector<std::string> metrics;
  std::string lambda;
  std::string tau;
  int grid_beta = 0;
  int grid_gamma = 0;
  double tol = 0.0;
  int count = 0;
  std::uint64_t seed = 20260815;
  std::string out_dir;
  bool canonical = false;
};

void to_json(nlohmann::json& j, const ScenarioConfig& cfg);
void from_json(const nlohmann::json& j, ScenarioConfig& cfg);
ScenarioConfig load_config(const std::string& path);

struct ScenarioCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // bound it was compared against
  std::string note;        // direction of the comparison, context
};

struct ScenarioReport {
  std::string scenario;
  bool pass = false;
  std::vector<ScenarioCheck> checks;
  nlohmann::json details;  // scenario-specific tables and residuals
  ScenarioConfig config;   // echo of the request, defaults filled in
  std::string version = kVersionString;
  std::string timestamp;       // empty in canonical mode
  double runtime_seconds = 0;  // zeroed in canonical mode

  // Registers the check and returns whether it passed. upper = true asserts
  // value <= threshold, otherwise value > threshold (violation gaps).
  bool check(const std::string& name, double value, double threshold,
             bool upper = true, const std::string& note = "");
  bool check_flag(const std::string& name, bool ok, const std::string& note = "");

  nlohmann::json to_json() const;
  std::string to_text() const;  // one line per check, aligned
};

struct ScenarioInfo {
  std::string id;
  std::string summary;
};

// The fixed registry; run_scenario accepts exactly these ids.
const std::vector<ScenarioInfo>& scenario_registry();

// Executes one scenario. Writes <out_dir>/<scenario>.json plus any CSV/SVG
// side tables when out_dir is set. Numeric failures surface as Error with
// the scenario id prepended.
ScenarioReport run_scenario(const ScenarioConfig& cfg);

struct SuiteResult {
  struct Row {
    std::string config_file;
    std::string scenario;
    bool pass = false;
    std::string note;
  };
  std::vector<Row> rows;
  bool all_pass = true;
};

// Runs every *.json config under config_dir (sorted), collecting failures
// instead of short-circuiting. Reports land in out_dir when set.
SuiteResult run_suite(const std::string& config_dir, const std::string& out_dir,
                      std::ostream& log);

}  // namespace twistorlab
