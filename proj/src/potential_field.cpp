#include "semcost/potential_field.hpp"

#include <cmath>

#include "semcost/error.hpp"

namespace semcost {

namespace {

void check_gain(double gain) {
    if (!std::isfinite(gain) || gain < 0.0) throw PreconditionError("repulsive gain must be finite and >= 0");
}

}  // namespace

ScalarField repulsive_field(const ScalarField& distance, double gain) {
    check_gain(gain);
    ScalarField out(distance.width, distance.height);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = gain * std::exp(-distance.values[i]);
    }
    return out;
}

ScalarField total_field(std::span<const ScalarField> distances, std::span<const double> gains, int width,
                        int height) {
    if (distances.size() != gains.size()) {
        throw PreconditionError("gain count does not match distance field count");
    }
    ScalarField total(width, height, 0.0);
    for (std::size_t k = 0; k < distances.size(); ++k) {
        const auto& d = distances[k];
        if (d.width != width || d.height != height) {
            throw PreconditionError("distance field dimensions do not match");
        }
        const double gain = gains[k];
        check_gain(gain);
        for (std::size_t i = 0; i < total.values.size(); ++i) total.values[i] += gain * std::exp(-d.values[i]);
    }
    return total;
}

PotentialStack::PotentialStack(DistanceFields distances, std::vector<double> gains, int width, int height)
    : distances_(std::move(distances)), width_(width), height_(height) {
    if (!distances_) throw PreconditionError("distance fields missing");
    set_gains(std::move(gains));
}

void PotentialStack::set_gains(std::vector<double> gains) {
    // Build first so a failure leaves the previous total in place.
    ScalarField total = total_field(*distances_, gains, width_, height_);
    gains_ = std::move(gains);
    total_ = std::move(total);
}

}  // namespace semcost
