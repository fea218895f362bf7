#pragma once

#include "reachcert/scenario.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace reachcert {

/// Malformed input file; message carries line and column.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const PolyIkModel& m);
nlohmann::json to_json(const Certificate& c);
nlohmann::json to_json(const StepRecord& s);
nlohmann::json to_json(const RunResult& r);
nlohmann::json to_json(const Obstacle& o);
nlohmann::json to_json(const Scenario& s);
nlohmann::json to_json(const PlannerConfig& c);

Scenario scenario_from_json(const nlohmann::json& j);
Obstacle obstacle_from_json(const nlohmann::json& j);

/// Overlays the keys present in `j` onto `cfg`; unknown keys are rejected.
void apply_planner_json(const nlohmann::json& j, PlannerConfig& cfg);

/// Parses text, turning nlohmann byte offsets into line:column.
nlohmann::json parse_with_context(const std::string& text, const std::string& source);

}  // namespace reachcert
