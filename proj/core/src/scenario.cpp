#include "twistorlab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "scenario_registry.hpp"

namespace twistorlab {

namespace {

const detail::ScenarioEntry& find_entry(const std::string& id) {
  for (const auto& e : detail::scenario_table()) {
    if (id == e.id) return e;
  }
  throw SpecParseError("unknown scenario id: " + id);
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double sanitize(double v) {
  if (std::isnan(v)) return 0.0;
  if (std::isinf(v)) return v > 0 ? 1e308 : -1e308;
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const ScenarioConfig& cfg) {
  j = nlohmann::json{{"scenario", cfg.scenario}, {"metrics", cfg.metrics},
                     {"lambda", cfg.lambda},     {"tau", cfg.tau},
                     {"grid", {cfg.grid_beta, cfg.grid_gamma}},
                     {"tol", cfg.tol},           {"count", cfg.count},
                     {"seed", cfg.seed},         {"out", cfg.out_dir},
                     {"canonical", cfg.canonical}};
}

void from_json(const nlohmann::json& j, ScenarioConfig& cfg) {
  cfg = ScenarioConfig{};
  if (!j.contains("scenario") || !j["scenario"].is_string()) {
    throw SpecParseError("config needs a \"scenario\" string");
  }
  cfg.scenario = j["scenario"].get<std::string>();
  find_entry(cfg.scenario);  // unknown ids rejected at parse time
  if (j.contains("metrics")) cfg.metrics = j["metrics"].get<std::vector<std::string>>();
  if (j.contains("lambda")) cfg.lambda = j["lambda"].get<std::string>();
  if (j.contains("tau")) cfg.tau = j["tau"].get<std::string>();
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (!g.is_array() || g.size() != 2) {
      throw SpecParseError("config grid must be [n_beta, n_gamma]");
    }
    cfg.grid_beta = g[0].get<int>();
    cfg.grid_gamma = g[1].get<int>();
  }
  if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
  if (j.contains("count")) cfg.count = j["count"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  if (j.contains("canonical")) cfg.canonical = j["canonical"].get<bool>();
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecParseError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecParseError(path + ": " + e.what());
  }
  try {
    return j.get<ScenarioConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecParseError(path + ": " + e.what());
  }
}

bool ScenarioReport::check(const std::string& name, double value,
                           double threshold, bool upper,
                           const std::string& note) {
  ScenarioCheck c;
  c.name = name;
  c.value = sanitize(value);
  c.threshold = threshold;
  c.pass = upper ? c.value <= threshold : c.value > threshold;
  c.note = note.empty() ? (upper ? "<=" : ">") : note;
  checks.push_back(c);
  return c.pass;
}

bool ScenarioReport::check_flag(const std::string& name, bool ok,
                                const std::string& note) {
  ScenarioCheck c;
  c.name = name;
  c.value = ok ? 1.0 : 0.0;
  c.threshold = 1.0;
  c.pass = ok;
  c.note = note;
  checks.push_back(c);
  return c.pass;
}

nlohmann::json ScenarioReport::to_json() const {
  nlohmann::json jchecks = nlohmann::json::array();
  for (const auto& c : checks) {
    jchecks.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"value", sanitize(c.value)},
                       {"threshold", c.threshold},
                       {"note", c.note}});
  }
  nlohmann::json j{{"scenario", scenario}, {"pass", pass},
                   {"checks", jchecks},    {"details", details},
                   {"config", config},     {"version", version}};
  if (!config.canonical) {
    j["timestamp"] = timestamp;
    j["runtime_seconds"] = runtime_seconds;
  }
  return j;
}

std::string ScenarioReport::to_text() const {
  std::string out = scenario + ": " + (pass ? "PASS" : "FAIL") + "\n";
  for (const auto& c : checks) {
    char line[256];
    std::snprintf(line, sizeof(line), "  [%s] %-38s %12.5g %s %.5g %s\n",
                  c.pass ? "pass" : "FAIL", c.name.c_str(), c.value,
                  c.note == ">" ? ">" : "<=", c.threshold,
                  (c.note == ">" || c.note == "<=") ? "" : c.note.c_str());
    out += line;
  }
  return out;
}

const std::vector<ScenarioInfo>& scenario_registry() {
  static const std::vector<ScenarioInfo> registry = [] {
    std::vector<ScenarioInfo> out;
    for (const auto& e : detail::scenario_table()) {
      out.push_back({e.id, e.summary});
    }
    return out;
  }();
  return registry;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  const auto& entry = find_entry(cfg.scenario);
  ScenarioReport report;
  report.scenario = cfg.scenario;
  report.config = cfg;

  const auto start = std::chrono::steady_clock::now();
  try {
    entry.fn(cfg, report);
  } catch (const SpecParseError&) {
    throw;
  } catch (const Error& e) {
    throw Error("scenario " + cfg.scenario + ": " + e.what());
  }
  const auto stop = std::chrono::steady_clock::now();

  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const ScenarioCheck& c) { return c.pass; });
  if (!cfg.canonical) {
    report.timestamp = utc_timestamp();
    report.runtime_seconds =
        std::chrono::duration<double>(stop - start).count();
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/" + cfg.scenario + ".json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write report " + path);
    out << report.to_json().dump(2) << "\n";
  }
  return report;
}

SuiteResult run_suite(const std::string& config_dir,
                      const std::string& out_dir, std::ostream& log) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(config_dir)) {
    throw Error("config directory not found: " + config_dir);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());

  SuiteResult result;
  for (const std::string& file : files) {
    SuiteResult::Row row;
    row.config_file = fs::path(file).filename().string();
    try {
      ScenarioConfig cfg = load_config(file);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      row.scenario = cfg.scenario;
      const ScenarioReport report = run_scenario(cfg);
      row.pass = report.pass;
      if (!report.pass) {
        for (const auto& c : report.checks) {
          if (!c.pass) {
            row.note = "failed check: " + c.name;
            break;
          }
        }
      }
      log << report.to_text();
    } catch (const std::exception& e) {
      row.pass = false;
      row.note = e.what();
      log << row.config_file << ": ERROR " << e.what() << "\n";
    }
    result.all_pass = result.all_pass && row.pass;
    result.rows.push_back(std::move(row));
  }

  log << "suite: " << result.rows.size() << " configs, "
      << (result.all_pass ? "all passed" : "FAILURES") << "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows) {
      rows.push_back({{"config", r.config_file},
                      {"scenario", r.scenario},
                      {"pass", r.pass},
                      {"note", r.note}});
    }
    nlohmann::json summary{{"all_pass", result.all_pass}, {"runs", rows}};
    std::ofstream out(out_dir + "/summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
  }
  return result;
}

}  // namespace twistorlab
