#pragma once

// JSON conversions shared by the session dump, the HTTP service and the CLI.

#include <json.hpp>

#include "semcost/bayes_fusion.hpp"
#include "semcost/grid.hpp"
#include "semcost/planner.hpp"
#include "semcost/scenario.hpp"

namespace semcost {

nlohmann::json to_json(Cell c);
Cell cell_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json to_json(const Scenario& scenario);
/// Strict conversion: unknown keys and wrong types raise ValidationError.
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SemanticGrid& grid);

/// {"width", "height", "values"}; values row-major from the bottom row,
/// unbounded entries written as null.
nlohmann::json to_json(const ScalarField& field);
ScalarField field_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PathMetrics& metrics);
PathMetrics metrics_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PlanResult& result);
PlanResult plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DangerReading& reading);
DangerReading reading_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ObstacleBelief& belief);
ObstacleBelief belief_from_json(const nlohmann::json& j);

}  // namespace semcost
