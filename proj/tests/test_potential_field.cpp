#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semcost/distance_field.hpp"
#include "semcost/potential_field.hpp"
#include "semcost/scenario.hpp"

using namespace semcost;

TEST_CASE("repulsive field is gain * exp(-distance)") {
    ScalarField d(3, 1);
    d.values = {0.0, 1.0, 2.5};
    const ScalarField f = repulsive_field(d, 2.0);
    CHECK(f.values[0] == doctest::Approx(2.0));
    CHECK(f.values[1] == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(f.values[1] == doctest::Approx(0.7358).epsilon(1e-4));
    CHECK(f.values[2] == doctest::Approx(2.0 * std::exp(-2.5)));
}

TEST_CASE("unbounded distance contributes nothing") {
    ScalarField d(2, 1, kUnboundedDistance);
    const ScalarField f = repulsive_field(d, 3.0);
    CHECK(f.values[0] == 0.0);
    CHECK(f.values[1] == 0.0);
}

TEST_CASE("negative or non-finite gains are rejected") {
    ScalarField d(1, 1);
    CHECK_THROWS_AS(repulsive_field(d, -0.1), PreconditionError);
    CHECK_THROWS_AS(repulsive_field(d, std::nan("")), PreconditionError);
}

TEST_CASE("total field on the cement scenario equals the brute-force sum") {
    const Scenario sc = load_scenario_file(SEMCOST_SOURCE_DIR "/scenarios/cement.json");
    const SemanticGrid grid = rasterize(sc);
    const std::vector<double> gains{0.21, 0.71, 0.21};
    auto fields = std::make_shared<const std::vector<ScalarField>>(per_obstacle_edfs(grid));
    const PotentialStack stack(fields, gains, grid.width, grid.height);
    const ScalarField expected = oracle::brute_force_potential(grid, gains);
    for (std::size_t i = 0; i < expected.values.size(); ++i) {
        CHECK(stack.total().values[i] == doctest::Approx(expected.values[i]).epsilon(1e-12));
    }
    CHECK(total_field(stack) == stack.total());
}

TEST_CASE("set_gains rebuilds from cached distances and keeps the old total on failure") {
    auto fields = std::make_shared<const std::vector<ScalarField>>(
        std::vector<ScalarField>{ScalarField(2, 2, 0.0), ScalarField(2, 2, 1.0)});
    PotentialStack stack(fields, {1.0, 1.0}, 2, 2);
    CHECK(stack.total().values[0] == doctest::Approx(1.0 + std::exp(-1.0)));
    stack.set_gains({0.5, 0.0});
    CHECK(stack.total().values[3] == doctest::Approx(0.5));
    const ScalarField before = stack.total();
    CHECK_THROWS_AS(stack.set_gains({1.0, -1.0}), PreconditionError);
    CHECK_THROWS_AS(stack.set_gains({1.0}), PreconditionError);
    CHECK(stack.total() == before);
    CHECK(stack.gains() == std::vector<double>{0.5, 0.0});
    CHECK(stack.shared_distances() == fields);
}

TEST_CASE("mismatched field shapes are rejected") {
    auto fields = std::make_shared<const std::vector<ScalarField>>(std::vector<ScalarField>{ScalarField(2, 3)});
    CHECK_THROWS_AS(PotentialStack(fields, {1.0}, 3, 2), PreconditionError);
}
