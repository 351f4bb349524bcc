#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "semcost/distance_field.hpp"
#include "semcost/planner.hpp"
#include "semcost/potential_field.hpp"

using namespace semcost;

namespace {

SemanticGrid open_grid(int w, int h) {
    SemanticGrid g;
    g.width = w;
    g.height = h;
    g.cell_owner.assign(static_cast<std::size_t>(w * h), kFreeCell);
    return g;
}

void block(SemanticGrid& g, const std::vector<Cell>& cells) {
    Obstacle o;
    o.id = "o" + std::to_string(g.obstacles.size());
    o.cells = cells;
    for (Cell c : cells) g.cell_owner[g.index(c)] = static_cast<int>(g.obstacles.size());
    g.obstacles.push_back(o);
}

PlannerParams params(double w1, double w2, double gamma, int connectivity = 8) {
    PlannerParams p;
    p.w1 = w1;
    p.w2 = w2;
    p.gamma = gamma;
    p.connectivity = connectivity;
    return p;
}

ScalarField field_for(const oracle::RandomMap& m) {
    const auto fields = per_obstacle_edfs(m.grid);
    return total_field(fields, m.gains, m.grid.width, m.grid.height);
}

}  // namespace

TEST_CASE("open grid diagonal") {
    const SemanticGrid g = open_grid(10, 10);
    const PlanResult r = plan(g, ScalarField(10, 10), {0, 0}, {9, 9}, params(1, 1, 0));
    CHECK(r.total_cost == doctest::Approx(9 * std::sqrt(2.0)));
    REQUIRE(r.path.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(r.path[static_cast<std::size_t>(i)] == Cell{i, i});
}

TEST_CASE("wall with a single gap") {
    SemanticGrid g = open_grid(5, 5);
    block(g, {{2, 0}, {2, 1}, {2, 2}, {2, 3}});
    const PlanResult r = plan(g, ScalarField(5, 5), {0, 0}, {4, 0}, params(1, 1, 0));
    CHECK(std::find(r.path.begin(), r.path.end(), Cell{2, 4}) != r.path.end());
    const auto best = oracle::shortest_cost(g, ScalarField(5, 5), {0, 0}, {4, 0}, 0);
    REQUIRE(best);
    CHECK(std::abs(r.total_cost - *best) <= 1e-9);
    CHECK(oracle::is_valid_path(g, r.path, {0, 0}, {4, 0}));
}

TEST_CASE("no diagonal squeeze between two blocked cells") {
    SemanticGrid g = open_grid(2, 2);
    block(g, {{1, 0}, {0, 1}});
    CHECK_THROWS_AS(plan(g, ScalarField(2, 2), {0, 0}, {1, 1}, params(1, 1, 0)), NoPathError);
}

TEST_CASE("four-connectivity uses only orthogonal steps") {
    const SemanticGrid g = open_grid(4, 4);
    const PlanResult r = plan(g, ScalarField(4, 4), {0, 0}, {3, 3}, params(1, 1, 0, 4));
    CHECK(r.total_cost == doctest::Approx(6.0));
    CHECK(oracle::is_valid_path(g, r.path, {0, 0}, {3, 3}, 4));
}

TEST_CASE("start equal to goal") {
    const SemanticGrid g = open_grid(3, 3);
    const PlanResult r = plan(g, ScalarField(3, 3, 5.0), {1, 1}, {1, 1}, params(1, 1.5, 1));
    CHECK(r.path == std::vector<Cell>{{1, 1}});
    CHECK(r.total_cost == 0.0);
}

TEST_CASE("precondition failures") {
    SemanticGrid g = open_grid(4, 4);
    block(g, {{2, 2}});
    const ScalarField f(4, 4);
    CHECK_THROWS_AS(plan(g, f, {2, 2}, {0, 0}, params(1, 1, 0)), PreconditionError);
    CHECK_THROWS_AS(plan(g, f, {0, 0}, {2, 2}, params(1, 1, 0)), PreconditionError);
    CHECK_THROWS_AS(plan(g, f, {0, 0}, {4, 0}, params(1, 1, 0)), PreconditionError);
    CHECK_THROWS_AS(plan(g, ScalarField(3, 4), {0, 0}, {3, 3}, params(1, 1, 0)), PreconditionError);
    CHECK_THROWS_AS(plan(g, f, {0, 0}, {3, 3}, params(0, 1, 0)), PreconditionError);
    CHECK_THROWS_AS(plan(g, f, {0, 0}, {3, 3}, params(1, 0.5, 0)), PreconditionError);
    CHECK_THROWS_AS(plan(g, f, {0, 0}, {3, 3}, params(1, 1, -1)), PreconditionError);
    CHECK_THROWS_AS(plan(g, f, {0, 0}, {3, 3}, params(1, 1, 0, 6)), PreconditionError);
}

TEST_CASE("unreachable goal reports expansions") {
    SemanticGrid g = open_grid(5, 5);
    block(g, {{2, 0}, {2, 1}, {2, 2}, {2, 3}, {2, 4}});
    try {
        plan(g, ScalarField(5, 5), {0, 0}, {4, 4}, params(1, 1.5, 0));
        FAIL("expected NoPathError");
    } catch (const NoPathError& e) {
        CHECK(e.stats().anchor_count + e.stats().informed_count >= 10);
    }
}

TEST_CASE("key arithmetic") {
    SearchNode n;
    n.h0 = 5;
    CHECK(key(n, QueueKind::Anchor, params(2, 1, 0)) == doctest::Approx(10.0));
    n.g = 3;
    n.h1 = 0.5;
    CHECK(key(n, QueueKind::Informed, params(1, 1, 0)) == doctest::Approx(3.5));
    n.h1 = 0.0;
    CHECK(key(n, QueueKind::Informed, params(1.7, 2, 0)) == doctest::Approx(3.0));
}

TEST_CASE("reconstruct_path walks parents back to the root") {
    std::vector<std::optional<Cell>> parents(9);
    // s=(0,0) -> a=(1,1) -> t=(2,1)
    parents[4] = Cell{0, 0};
    parents[5] = Cell{1, 1};
    CHECK(reconstruct_path(parents, 3, {2, 1}) == std::vector<Cell>{{0, 0}, {1, 1}, {2, 1}});
    CHECK(reconstruct_path(parents, 3, {0, 0}) == std::vector<Cell>{{0, 0}});
    parents[0] = Cell{2, 1};
    CHECK_THROWS_AS(reconstruct_path(parents, 3, {2, 1}), Error);
}

TEST_CASE("path_cost charges the arrival cell only") {
    ScalarField f(3, 1);
    f.values = {100.0, 1.0, 2.0};
    const std::vector<Cell> path{{0, 0}, {1, 0}, {2, 0}};
    CHECK(path_cost(f, path, 0.5) == doctest::Approx(2.0 + 0.5 * 3.0));
    CHECK(path_cost(f, std::vector<Cell>{{0, 0}}, 1.0) == 0.0);
}

TEST_CASE("potential pushes the path away from an obstacle") {
    SemanticGrid g = open_grid(21, 11);
    block(g, {{10, 4}, {10, 5}, {10, 6}});
    const auto fields = per_obstacle_edfs(g);
    const ScalarField f = total_field(fields, std::vector<double>{8.0}, 21, 11);
    const ScalarField edf = global_edf(g);
    auto min_clearance = [&](const std::vector<Cell>& path) {
        double m = 1e9;
        for (Cell c : path) m = std::min(m, edf[c]);
        return m;
    };
    const PlanResult flat = plan(g, f, {0, 5}, {20, 5}, params(1, 1, 0));
    const PlanResult shaped = plan(g, f, {0, 5}, {20, 5}, params(1, 1, 1));
    CHECK(min_clearance(shaped.path) > min_clearance(flat.path));
}

TEST_CASE("random solved instances give valid, bounded paths") {
    std::mt19937_64 rng(11);
    int solved = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = oracle::random_map(rng, 16, 16, 6);
        const ScalarField f = field_for(m);
        const PlannerParams p = params(trial % 2 ? 1.5 : 1.0, trial % 3 ? 2.0 : 1.0, trial % 4 * 0.5);
        const auto best = oracle::shortest_cost(m.grid, f, m.start, m.goal, p.gamma);
        if (!best) {
            CHECK_THROWS_AS(plan(m.grid, f, m.start, m.goal, p), NoPathError);
            continue;
        }
        ++solved;
        const PlanResult r = plan(m.grid, f, m.start, m.goal, p);
        CHECK(oracle::is_valid_path(m.grid, r.path, m.start, m.goal));
        CHECK(r.total_cost == doctest::Approx(oracle::walk_cost(f, r.path, p.gamma)).epsilon(1e-12));
        CHECK(r.total_cost <= p.bound() * *best + 1e-9);
        CHECK(r.total_cost >= *best - 1e-9);
    }
    CHECK(solved > 20);
}

TEST_CASE("identical inputs give identical results") {
    std::mt19937_64 rng(5);
    const auto m = oracle::random_map(rng, 20, 20, 5);
    const ScalarField f = field_for(m);
    if (oracle::shortest_cost(m.grid, f, m.start, m.goal, 1.0)) {
        CHECK(plan(m.grid, f, m.start, m.goal, params(1, 1.5, 1)) == plan(m.grid, f, m.start, m.goal, params(1, 1.5, 1)));
    }
}
