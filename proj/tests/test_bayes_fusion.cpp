#include <doctest.h>

#include <cmath>
#include <limits>

#include "semcost/bayes_fusion.hpp"

using namespace semcost;

TEST_CASE("update adds N*score and N*(1-score) pseudo-counts") {
    const BetaState busy = update(BetaState{1, 1}, 1.0, 5);
    CHECK(busy.alpha == doctest::Approx(6.0));
    CHECK(busy.beta == doctest::Approx(1.0));
    CHECK(posterior_mean(busy) == doctest::Approx(6.0 / 7.0));

    const BetaState empty = update(BetaState{1, 1}, 0.1, 5);
    CHECK(empty.alpha == doctest::Approx(1.5));
    CHECK(empty.beta == doctest::Approx(5.5));
    CHECK(posterior_mean(empty) == doctest::Approx(1.5 / 7.0));
}

TEST_CASE("table posteriors follow (1 + 5p)/7") {
    const double scores[] = {1.0, 0.1, 0.2, 0.8, 0.3, 0.6};
    const double printed[] = {0.86, 0.21, 0.29, 0.71, 0.36, 0.57};
    for (int i = 0; i < 6; ++i) {
        const double mean = posterior_mean(update(reset(FusionParams{}), scores[i], 5));
        CHECK(mean == doctest::Approx((1 + 5 * scores[i]) / 7).epsilon(1e-14));
        CHECK(std::round(mean * 100) / 100 == doctest::Approx(printed[i]));
    }
}

TEST_CASE("zero trust leaves the belief unchanged") {
    const BetaState s{2.5, 4.0};
    CHECK(update(s, 0.9, 0) == s);
}

TEST_CASE("update rejects bad inputs") {
    CHECK_THROWS_AS(update(BetaState{1, 1}, 1.2, 5), PreconditionError);
    CHECK_THROWS_AS(update(BetaState{1, 1}, -0.1, 5), PreconditionError);
    CHECK_THROWS_AS(update(BetaState{1, 1}, std::nan(""), 5), PreconditionError);
    CHECK_THROWS_AS(update(BetaState{1, 1}, 0.5, -1), PreconditionError);
    CHECK_THROWS_AS(update(BetaState{1, 1}, 0.5, std::numeric_limits<double>::infinity()), PreconditionError);
    CHECK_THROWS_AS(update(BetaState{0, 1}, 0.5, 5), PreconditionError);
}

TEST_CASE("posterior mean stays strictly inside (0, 1)") {
    BetaState s{1, 1};
    for (int i = 0; i < 2000; ++i) s = update(s, 1.0, 1e300);
    const double m = posterior_mean(s);
    CHECK(m > 0.0);
    CHECK(m < 1.0);
    CHECK(posterior_mean(BetaState{1e-300, 1e300}) > 0.0);
}

TEST_CASE("effective gain scales the original base gain") {
    CHECK(effective_gain(BetaState{6, 1}, 2.0) == doctest::Approx(12.0 / 7.0));
    CHECK(effective_gain(BetaState{1, 1}, 0.0) == 0.0);
    CHECK_THROWS_AS(effective_gain(BetaState{1, 1}, -1.0), PreconditionError);
}

TEST_CASE("reset returns the configured prior") {
    CHECK(reset(FusionParams{}) == BetaState{1, 1});
    CHECK(reset(FusionParams{5, 2, 3}) == BetaState{2, 3});
    CHECK_THROWS_AS(reset(FusionParams{5, 0, 1}), ValidationError);
}

TEST_CASE("validate names the bad fusion field") {
    try {
        validate(FusionParams{-1, 1, 1});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "fusion.trust_n");
    }
    CHECK_THROWS_AS(validate(FusionParams{5, 1, -2}), ValidationError);
    CHECK_NOTHROW(validate(FusionParams{0, 0.5, 0.5}));
}

TEST_CASE("chained updates commute") {
    const BetaState a = update(update(BetaState{1, 1}, 0.3, 5), 0.9, 2);
    const BetaState b = update(update(BetaState{1, 1}, 0.9, 2), 0.3, 5);
    CHECK(a.alpha == doctest::Approx(b.alpha).epsilon(1e-15));
    CHECK(a.beta == doctest::Approx(b.beta).epsilon(1e-15));
}
