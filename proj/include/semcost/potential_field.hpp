#pragma once

#include <memory>
#include <span>
#include <vector>

#include "semcost/error.hpp"
#include "semcost/grid.hpp"

namespace semcost {

/// gain * exp(-distance) at every cell. Throws PreconditionError for a
/// negative or non-finite gain.
ScalarField repulsive_field(const ScalarField& distance, double gain);

/// Cached per-obstacle distance fields plus the current gains and their
/// weighted repulsive sum. Geometry is fixed at construction; changing gains
/// rebuilds `total()` from the cached distances.
class PotentialStack {
public:
    using DistanceFields = std::shared_ptr<const std::vector<ScalarField>>;

    PotentialStack() = default;
    /// Throws PreconditionError if the fields disagree in shape or the gain
    /// count differs from the field count.
    PotentialStack(DistanceFields distances, std::vector<double> gains, int width, int height);

    void set_gains(std::vector<double> gains);

    const std::vector<ScalarField>& distances() const noexcept { return *distances_; }
    const DistanceFields& shared_distances() const noexcept { return distances_; }
    const std::vector<double>& gains() const noexcept { return gains_; }
    const ScalarField& total() const noexcept { return total_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

private:
    DistanceFields distances_ = std::make_shared<const std::vector<ScalarField>>();
    std::vector<double> gains_;
    int width_ = 0;
    int height_ = 0;
    ScalarField total_;
};

/// Sum over obstacles of gains[i] * exp(-distances[i]). Throws
/// PreconditionError on mismatched dimensions or counts, or a negative gain.
ScalarField total_field(std::span<const ScalarField> distances, std::span<const double> gains, int width,
                        int height);

inline ScalarField total_field(const PotentialStack& stack) {
    return total_field(stack.distances(), stack.gains(), stack.width(), stack.height());
}

}  // namespace semcost
