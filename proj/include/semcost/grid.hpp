#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace semcost {

/// Integer cell coordinate. Column grows to the right, row grows upward from
/// the map's lower-left corner.
struct Cell {
    int col = 0;
    int row = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Marker stored in SemanticGrid::cell_owner for unoccupied cells.
inline constexpr int kFreeCell = -1;

/// Value used by distance fields when there is nothing to measure against.
inline constexpr double kUnboundedDistance = std::numeric_limits<double>::infinity();

/// Dense per-cell real field, row-major with row 0 at the bottom.
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::size_t index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(c.col);
    }
    double& operator[](Cell c) noexcept { return values[index(c)]; }
    double operator[](Cell c) const noexcept { return values[index(c)]; }

    bool same_shape(const ScalarField& other) const noexcept {
        return width == other.width && height == other.height;
    }

    friend bool operator==(const ScalarField&, const ScalarField&) = default;
};

/// A rasterized map element.
struct Obstacle {
    std::string id;
    std::string family;
    std::vector<Cell> cells;
    double base_gain = 1.0;

    friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// Occupancy grid whose occupied cells remember which obstacle owns them.
struct SemanticGrid {
    int width = 0;
    int height = 0;
    double resolution_m = 1.0;
    std::vector<int> cell_owner;  ///< kFreeCell or an index into `obstacles`
    std::vector<Obstacle> obstacles;

    bool in_bounds(Cell c) const noexcept {
        return c.col >= 0 && c.row >= 0 && c.col < width && c.row < height;
    }
    std::size_t index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(c.col);
    }
    Cell cell_at(std::size_t idx) const noexcept {
        return Cell{static_cast<int>(idx % static_cast<std::size_t>(width)),
                    static_cast<int>(idx / static_cast<std::size_t>(width))};
    }
    int owner(Cell c) const noexcept { return cell_owner[index(c)]; }
    bool is_free(Cell c) const noexcept { return owner(c) == kFreeCell; }
    std::size_t cell_count() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    friend bool operator==(const SemanticGrid&, const SemanticGrid&) = default;
};

}  // namespace semcost
