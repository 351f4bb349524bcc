#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semcost/error.hpp"
#include "semcost/grid.hpp"

namespace semcost {

struct PlannerParams {
    double w1 = 1.0;     ///< heuristic inflation, > 0
    double w2 = 1.5;     ///< informed-vs-anchor factor, >= 1
    double gamma = 1.0;  ///< weight of the potential term in the edge cost
    int connectivity = 8;

    /// Multiplicative suboptimality bound the search guarantees.
    double bound() const noexcept { return (w1 > 1.0 ? w1 : 1.0) * w2; }

    friend bool operator==(const PlannerParams&, const PlannerParams&) = default;
};

/// Throws ValidationError naming the bad field.
void validate(const PlannerParams& params);

struct PathMetrics {
    double length_cells = 0.0;
    double length_m = 0.0;
    /// Absent when the map has no obstacles.
    std::optional<double> min_obstacle_dist_m;
    std::optional<double> avg_obstacle_dist_m;

    friend bool operator==(const PathMetrics&, const PathMetrics&) = default;
};

struct ExpansionStats {
    std::size_t anchor_count = 0;
    std::size_t informed_count = 0;

    friend bool operator==(const ExpansionStats&, const ExpansionStats&) = default;
};

struct PlanResult {
    std::vector<Cell> path;  ///< start first, goal last
    double total_cost = 0.0;
    ExpansionStats expansions;
    PathMetrics metrics;

    friend bool operator==(const PlanResult&, const PlanResult&) = default;
};

/// Goal not reachable from start through free cells.
class NoPathError : public Error {
public:
    NoPathError(const std::string& message, ExpansionStats stats)
        : Error(message), stats_(stats) {}
    const ExpansionStats& stats() const noexcept { return stats_; }

private:
    ExpansionStats stats_;
};

enum class QueueKind { Anchor, Informed };

/// Search-time view of a cell.
struct SearchNode {
    Cell cell;
    double g = 0.0;
    std::optional<Cell> parent;
    double h0 = 0.0;  ///< Euclidean distance to the goal, cell-lengths
    double h1 = 0.0;  ///< total potential at the cell
};

/// Priority of `node` in the given queue: g + w1*h0 (anchor) or g + w1*h1.
double key(const SearchNode& node, QueueKind queue, const PlannerParams& params) noexcept;

/// Walks parent links from `goal` back to the root. `parents` is indexed like
/// the grid (row-major); the root is the cell whose parent is empty.
std::vector<Cell> reconstruct_path(std::span<const std::optional<Cell>> parents, int width, Cell goal);

/// Cost of a neighbor-to-neighbor cell path under the planner's edge cost:
/// step length plus gamma * potential at each arrival cell.
double path_cost(const ScalarField& potential, std::span<const Cell> path, double gamma);

/// Two-queue multi-heuristic A*. Edge cost from u to v is the Euclidean step
/// length plus gamma * potential(v); occupied cells are never entered.
///
/// The returned cost is at most params.bound() times the optimum. With
/// gamma == 0, w1 == 1 and either w2 == 1 or an all-zero potential the search
/// returns an optimal path.
///
/// Throws PreconditionError for out-of-bounds or occupied endpoints, invalid
/// parameters or a potential whose shape differs from the grid, and
/// NoPathError when the goal is unreachable. `metrics` is left default; fill
/// it with compute_metrics().
PlanResult plan(const SemanticGrid& grid, const ScalarField& potential, Cell start, Cell goal,
                const PlannerParams& params);

}  // namespace semcost
