#pragma once

#include <vector>

#include "twistorlab/scenario.hpp"

namespace twistorlab::detail {

using ScenarioFn = void (*)(const ScenarioConfig&, ScenarioReport&);

struct ScenarioEntry {
  const char* id;
  const char* summary;
  ScenarioFn fn;
};

// Defined next to the scenario bodies; order is the published registry order.
const std::vector<ScenarioEntry>& scenario_table();

}  // namespace twistorlab::detail
