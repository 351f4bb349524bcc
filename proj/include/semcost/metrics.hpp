#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semcost/grid.hpp"
#include "semcost/planner.hpp"

namespace semcost {

struct PathLength {
    double cells = 0.0;
    double meters = 0.0;
};

/// Sum of center-to-center step lengths.
PathLength path_length(std::span<const Cell> path, double resolution_m);

struct ObstacleDistances {
    double min_m = 0.0;
    double avg_m = 0.0;
};

/// Minimum and mean of the global distance field over every path cell,
/// start and goal included, in meters. Empty when the field is unbounded
/// (no obstacles) or the path is empty.
std::optional<ObstacleDistances> obstacle_distances(std::span<const Cell> path, const ScalarField& global_edf,
                                                    double resolution_m);

PathMetrics compute_metrics(std::span<const Cell> path, const ScalarField& global_edf, double resolution_m);

/// One column of a side-by-side comparison table.
struct ComparisonColumn {
    std::string label;
    std::optional<PathMetrics> metrics;        ///< empty when the run failed
    std::vector<std::optional<double>> posteriors;  ///< per obstacle; empty entries print as a dash
    std::string error;
};

struct ComparisonTable {
    std::vector<std::string> obstacle_labels;
    std::vector<ComparisonColumn> columns;
};

/// Plain-text table: path metrics block, then a posterior block, one column
/// per run.
std::string render_table(const ComparisonTable& table);

}  // namespace semcost
