#include "semcost/bayes_fusion.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "semcost/error.hpp"

namespace semcost {

namespace {

bool valid_state(const BetaState& s) {
    return std::isfinite(s.alpha) && std::isfinite(s.beta) && s.alpha > 0.0 && s.beta > 0.0;
}

}  // namespace

void validate(const FusionParams& params) {
    if (!std::isfinite(params.trust_n) || params.trust_n < 0.0) {
        throw ValidationError("fusion.trust_n", "must be a finite value >= 0");
    }
    if (!std::isfinite(params.prior_alpha) || params.prior_alpha <= 0.0) {
        throw ValidationError("fusion.prior_alpha", "must be > 0");
    }
    if (!std::isfinite(params.prior_beta) || params.prior_beta <= 0.0) {
        throw ValidationError("fusion.prior_beta", "must be > 0");
    }
}

BetaState update(const BetaState& state, double score, double trust_n) {
    if (!valid_state(state)) {
        throw PreconditionError("Beta state must have finite alpha, beta > 0");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
        std::ostringstream msg;
        msg << "danger score " << score << " outside [0, 1]";
        throw PreconditionError(msg.str());
    }
    if (!std::isfinite(trust_n) || trust_n < 0.0) {
        throw PreconditionError("trust N must be a finite value >= 0");
    }
    const double successes = trust_n * score;
    const double failures = trust_n * (1.0 - score);
    return BetaState{state.alpha + successes, state.beta + failures};
}

double posterior_mean(const BetaState& state) noexcept {
    double mean = state.alpha / (state.alpha + state.beta);
    // Once one count dwarfs the other by ~2^53 the quotient rounds onto the
    // boundary; keep it inside the open interval.
    if (mean >= 1.0) mean = std::nextafter(1.0, 0.0);
    if (mean <= 0.0) mean = std::numeric_limits<double>::denorm_min();
    return mean;
}

double effective_gain(const BetaState& state, double base_gain) {
    if (!(base_gain >= 0.0)) {
        throw PreconditionError("base gain must be >= 0");
    }
    return posterior_mean(state) * base_gain;
}

BetaState reset(const FusionParams& params) {
    if (!std::isfinite(params.prior_alpha) || params.prior_alpha <= 0.0) {
        throw ValidationError("fusion.prior_alpha", "must be > 0");
    }
    if (!std::isfinite(params.prior_beta) || params.prior_beta <= 0.0) {
        throw ValidationError("fusion.prior_beta", "must be > 0");
    }
    return BetaState{params.prior_alpha, params.prior_beta};
}

}  // namespace semcost
