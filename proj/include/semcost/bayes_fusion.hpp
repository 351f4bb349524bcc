#pragma once

#include <string>
#include <vector>

#include "semcost/error.hpp"

namespace semcost {

/// Beta(alpha, beta) belief that an obstacle is dangerous. Both pseudo-counts
/// stay strictly positive for the lifetime of a value.
struct BetaState {
    double alpha = 1.0;
    double beta = 1.0;

    friend bool operator==(const BetaState&, const BetaState&) = default;
};

struct FusionParams {
    double trust_n = 5.0;  ///< virtual sample size N behind each danger score
    double prior_alpha = 1.0;
    double prior_beta = 1.0;

    friend bool operator==(const FusionParams&, const FusionParams&) = default;
};

/// One sensor output: danger score in [0, 1] for one obstacle under one prompt.
struct DangerReading {
    std::string obstacle_id;
    double score = 0.0;
    std::string prompt_id;

    friend bool operator==(const DangerReading&, const DangerReading&) = default;
};

/// Throws ValidationError unless trust_n >= 0 and both priors are > 0.
void validate(const FusionParams& params);

/// Treats `score` as the mean of `trust_n` Bernoulli trials and adds the
/// resulting pseudo-counts. Throws PreconditionError for a score outside
/// [0, 1], a negative or non-finite N, or an invalid input state.
BetaState update(const BetaState& state, double score, double trust_n);

/// alpha / (alpha + beta), kept strictly inside (0, 1).
double posterior_mean(const BetaState& state) noexcept;

/// Effective repulsive gain: posterior mean times the obstacle's original
/// base gain. Never applied to an already-scaled gain.
double effective_gain(const BetaState& state, double base_gain);

BetaState reset(const FusionParams& params);

/// Belief for one obstacle together with its update trail.
struct ObstacleBelief {
    struct Entry {
        std::string prompt_id;
        double alpha = 0.0;
        double beta = 0.0;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    BetaState state;
    std::vector<Entry> history;

    friend bool operator==(const ObstacleBelief&, const ObstacleBelief&) = default;
};

}  // namespace semcost
