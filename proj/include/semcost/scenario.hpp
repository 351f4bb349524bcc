#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semcost/bayes_fusion.hpp"
#include "semcost/grid.hpp"
#include "semcost/planner.hpp"

namespace semcost {

/// Axis-aligned rectangle in meters: [x0, y0, x1, y1], closed.
struct RectFootprint {
    std::array<double, 4> bounds_m{};

    friend bool operator==(const RectFootprint&, const RectFootprint&) = default;
};

struct CellFootprint {
    std::vector<Cell> cells;

    friend bool operator==(const CellFootprint&, const CellFootprint&) = default;
};

using Footprint = std::variant<RectFootprint, CellFootprint>;

struct ObstacleSpec {
    std::string id;
    std::string family;
    double base_gain = 1.0;
    Footprint footprint;

    friend bool operator==(const ObstacleSpec&, const ObstacleSpec&) = default;
};

struct Scenario {
    std::string name;
    double resolution_m = 0.1;
    int width_cells = 0;
    int height_cells = 0;
    std::vector<ObstacleSpec> obstacles;
    Cell start_cell;
    Cell goal_cell;
    PlannerParams planner_params;
    FusionParams fusion_params;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses and validates scenario markup (JSON). Unknown keys are rejected.
/// Throws ParseError for malformed text and ValidationError naming the
/// offending field for invariant violations.
Scenario load_scenario(std::string_view source_text);

/// Reads a scenario file from disk.
Scenario load_scenario_file(const std::string& path);

/// Throws ValidationError on the first broken invariant.
void validate(const Scenario& scenario);

/// Canonical JSON text of a scenario; load_scenario(to_json_text(s)) == s.
std::string to_json_text(const Scenario& scenario);

/// Rasterizes footprints. A rectangle covers the cells whose centers lie in
/// the closed rectangle; cell lists are copied. Later obstacles own overlap
/// cells. Throws ValidationError for a footprint that covers no cell.
SemanticGrid rasterize(const Scenario& scenario);

/// Canonical text serialization of a grid (stable across runs).
std::string to_json_text(const SemanticGrid& grid);

}  // namespace semcost
