#pragma once

#include <span>
#include <vector>

#include "semcost/error.hpp"
#include "semcost/grid.hpp"

namespace semcost {

/// Exact Euclidean distance transform of a binary mask: distance (in
/// cell-lengths, between cell centers) from every cell to the nearest cell
/// with `mask != 0`. All cells are kUnboundedDistance for an empty mask.
ScalarField euclidean_distance_transform(std::span<const unsigned char> mask, int width, int height);

/// Distance from every cell to the nearest cell of obstacle `obstacle_index`;
/// zero on the obstacle's own cells. Throws PreconditionError for a bad index
/// or an obstacle without cells.
ScalarField per_obstacle_edf(const SemanticGrid& grid, std::size_t obstacle_index);

/// All per-obstacle fields in obstacle order. Computed in parallel.
std::vector<ScalarField> per_obstacle_edfs(const SemanticGrid& grid);

/// Distance to the nearest cell of any obstacle: the pointwise minimum of the
/// per-obstacle fields. With no obstacles every value is kUnboundedDistance.
ScalarField global_edf(const SemanticGrid& grid);

/// Pointwise minimum over already-computed per-obstacle fields.
ScalarField global_edf(std::span<const ScalarField> per_obstacle, int width, int height);

bool is_unbounded(const ScalarField& field) noexcept;

}  // namespace semcost
