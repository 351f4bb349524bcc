// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// non-zero if any criterion fails. Offline only (mock and fixture backends).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scripted_backend.hpp"
#include "semcost/distance_field.hpp"
#include "semcost/potential_field.hpp"
#include "semcost/serialize.hpp"
#include "semcost/session.hpp"

using namespace semcost;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void run(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    char timing[96];
    std::snprintf(timing, sizeof timing, "%.3f s of %.3g s", secs, budget_s);
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << out.detail << " (" << timing
              << (in_time ? "" : ", over budget") << ")\n";
}

std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

Scenario shipped(const std::string& name) {
    return load_scenario_file(std::string(SEMCOST_SOURCE_DIR "/scenarios/") + name + ".json");
}

// ---------------------------------------------------------------------------

Outcome fusion_arithmetic() {
    const double scores[] = {1.0, 0.1, 0.2, 0.8, 0.3, 0.6};
    const double expected[] = {0.86, 0.21, 0.29, 0.71, 0.36, 0.57};

    // Which trust N reproduces every expected posterior with some score on a
    // 0.05 grid? Checked before the timed part.
    std::vector<int> fitting;
    for (int n = 1; n <= 20; ++n) {
        bool all = true;
        for (double target : expected) {
            bool any = false;
            for (int k = 0; k <= 20; ++k) {
                const double m = posterior_mean(update(BetaState{1, 1}, k * 0.05, n));
                any = any || std::round(m * 100) == std::round(target * 100);
            }
            all = all && any;
        }
        if (all) fitting.push_back(n);
    }
    if (fitting != std::vector<int>{5}) {
        std::string list;
        for (int n : fitting) list += std::to_string(n) + " ";
        return {false, "brute-force fit is not uniquely N=5: { " + list + "}"};
    }

    const FusionParams params;
    const auto t0 = Clock::now();
    double means[6];
    for (int i = 0; i < 6; ++i) means[i] = posterior_mean(update(reset(params), scores[i], params.trust_n));
    const double us = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();

    std::string got;
    bool ok = us < 1000.0;
    for (int i = 0; i < 6; ++i) {
        const double rounded = std::round(means[i] * 100) / 100;
        ok = ok && std::round(means[i] * 100) == std::round(expected[i] * 100);
        got += fmt(rounded, 2) + (i < 5 ? "," : "");
    }
    return {ok, "N=5 unique fit over N=1..20; posteriors {" + got + "} vs expected {0.86,0.21,0.29,0.71,0.36,0.57}; " +
                    fmt(us, 3) + " us for 6 updates (limit 1000 us)"};
}

Outcome stability_fuzz() {
    std::mt19937_64 rng(20240601);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> burst(1, 5000);
    const double trusts[] = {0.0, 1.0, 5.0, 100.0};
    BetaState states[4];
    long bad = 0;
    long updates = 0;
    double score = 1.0;
    int remaining = 0;
    while (updates < 1'000'000) {
        // Long runs of the same extreme score push one pseudo-count hard.
        if (remaining == 0) {
            score = coin(rng) ? 1.0 : 0.0;
            remaining = burst(rng);
        }
        --remaining;
        const int k = static_cast<int>(updates % 4);
        states[k] = update(states[k], score, trusts[k]);
        const double m = posterior_mean(states[k]);
        if (!(std::isfinite(states[k].alpha) && std::isfinite(states[k].beta) && states[k].alpha > 0 &&
              states[k].beta > 0 && m > 0.0 && m < 1.0 && std::isfinite(m))) {
            ++bad;
        }
        ++updates;
    }
    return {bad == 0, std::to_string(updates) + " updates, scores in {0,1}, N in {0,1,5,100}: " + std::to_string(bad) +
                          " invalid states; final N=100 state (" + fmt(states[3].alpha) + ", " + fmt(states[3].beta) +
                          ")"};
}

Outcome edf_oracle() {
    std::mt19937_64 rng(77);
    double worst = 0.0;
    long cells = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int w = std::uniform_int_distribution<int>(1, 64)(rng);
        const int h = std::uniform_int_distribution<int>(1, 64)(rng);
        const int obstacles = std::uniform_int_distribution<int>(1, 3)(rng);
        const double density = std::uniform_real_distribution<double>(0.002, 0.08)(rng);
        SemanticGrid g;
        g.width = w;
        g.height = h;
        g.cell_owner.assign(static_cast<std::size_t>(w * h), kFreeCell);
        std::bernoulli_distribution on(density);
        std::uniform_int_distribution<int> which(0, obstacles - 1);
        for (int k = 0; k < obstacles; ++k) g.obstacles.push_back(Obstacle{"o" + std::to_string(k), "", {}, 1.0});
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            if (on(rng)) g.cell_owner[i] = which(rng);
        }
        for (int k = 0; k < obstacles; ++k) {
            auto& cellsk = g.obstacles[static_cast<std::size_t>(k)].cells;
            for (std::size_t i = 0; i < g.cell_count(); ++i) {
                if (g.cell_owner[i] == k) cellsk.push_back(g.cell_at(i));
            }
            if (cellsk.empty()) {
                // Every obstacle needs at least one cell.
                const std::size_t i = std::uniform_int_distribution<std::size_t>(0, g.cell_count() - 1)(rng);
                if (g.cell_owner[i] != kFreeCell) {
                    auto& prev = g.obstacles[static_cast<std::size_t>(g.cell_owner[i])].cells;
                    prev.erase(std::remove(prev.begin(), prev.end(), g.cell_at(i)), prev.end());
                }
                g.cell_owner[i] = k;
                cellsk.push_back(g.cell_at(i));
            }
        }
        for (int k = 0; k < obstacles; ++k) {
            if (g.obstacles[static_cast<std::size_t>(k)].cells.empty()) continue;
            const ScalarField got = per_obstacle_edf(g, static_cast<std::size_t>(k));
            const ScalarField want = oracle::brute_force_edf(oracle::obstacle_mask(g, k), w, h);
            for (std::size_t i = 0; i < got.values.size(); ++i) {
                worst = std::max(worst, std::abs(got.values[i] - want.values[i]));
                ++cells;
            }
        }
    }
    return {worst <= 1e-9, "200 grids up to 64x64, " + std::to_string(cells) + " cells compared, max |error| " +
                               fmt(worst) + " (tolerance 1e-9)"};
}

struct SearchCase {
    oracle::RandomMap map;
    ScalarField field;
    double best = 0.0;
};

SearchCase solvable_case(std::mt19937_64& rng, double gamma) {
    for (;;) {
        SearchCase c;
        c.map = oracle::random_map(rng, 32, 32, 10);
        if (c.map.start == c.map.goal) continue;
        const auto fields = per_obstacle_edfs(c.map.grid);
        c.field = total_field(fields, c.map.gains, 32, 32);
        const auto best = oracle::shortest_cost(c.map.grid, c.field, c.map.start, c.map.goal, gamma);
        if (!best) continue;
        c.best = *best;
        return c;
    }
}

Outcome astar_reduction() {
    std::mt19937_64 rng(1001);
    const double w2s[] = {1.0, 1.5, 2.0};
    int exact = 0;
    double worst = 0.0;
    std::string first_bad;
    for (int trial = 0; trial < 100; ++trial) {
        const SearchCase c = solvable_case(rng, 0.0);
        PlannerParams p;
        p.w1 = 1.0;
        p.w2 = w2s[trial % 3];
        p.gamma = 0.0;
        const PlanResult r = plan(c.map.grid, c.field, c.map.start, c.map.goal, p);
        const double diff = std::abs(r.total_cost - c.best);
        worst = std::max(worst, diff);
        if (diff == 0.0 && oracle::is_valid_path(c.map.grid, r.path, c.map.start, c.map.goal)) {
            ++exact;
        } else if (first_bad.empty()) {
            first_bad = "; first mismatch trial " + std::to_string(trial) + " w2=" + fmt(p.w2) + " cost " +
                        fmt(r.total_cost, 12) + " vs " + fmt(c.best, 12);
        }
    }
    return {exact == 100, std::to_string(exact) + "/100 random 32x32 maps with gamma=0, w1=1, w2 in {1,1.5,2} match the "
                          "label-correcting oracle; max |diff| " + fmt(worst) + " (required: exactly 0)" + first_bad};
}

Outcome suboptimality_bound() {
    std::mt19937_64 rng(2002);
    const double gammas[] = {0.5, 2.0}, w1s[] = {1.0, 1.5}, w2s[] = {1.5, 2.0};
    int within = 0;
    double worst_ratio = 0.0;
    std::string first_bad;
    for (int trial = 0; trial < 100; ++trial) {
        PlannerParams p;
        p.gamma = gammas[trial % 2];
        p.w1 = w1s[(trial / 2) % 2];
        p.w2 = w2s[(trial / 4) % 2];
        const SearchCase c = solvable_case(rng, p.gamma);
        const PlanResult r = plan(c.map.grid, c.field, c.map.start, c.map.goal, p);
        const bool valid = oracle::is_valid_path(c.map.grid, r.path, c.map.start, c.map.goal);
        const bool honest = std::abs(oracle::walk_cost(c.field, r.path, p.gamma) - r.total_cost) <= 1e-9;
        const bool bounded = r.total_cost <= p.bound() * c.best + 1e-9;
        if (c.best > 0) worst_ratio = std::max(worst_ratio, r.total_cost / c.best / p.bound());
        if (valid && honest && bounded) {
            ++within;
        } else if (first_bad.empty()) {
            first_bad = "; first violation trial " + std::to_string(trial);
        }
    }
    return {within == 100, std::to_string(within) + "/100 maps within max(1,w1)*w2 of the oracle (+1e-9); worst "
                           "cost/(bound*optimum) " + fmt(worst_ratio, 4) + first_bad};
}

Outcome behavioral_orderings() {
    FixtureBackend fixture = FixtureBackend::from_file(SEMCOST_SOURCE_DIR "/fixtures/table_prompts.json");
    auto table = [&](const std::string& name) {
        const auto j = nlohmann::json::parse(
            [&] {
                std::ifstream in(std::string(SEMCOST_SOURCE_DIR "/scenarios/") + name + "_prompts.json");
                std::ostringstream buf;
                buf << in.rdbuf();
                return buf.str();
            }());
        std::vector<PromptVariant> variants;
        for (const auto& v : j) variants.push_back({v["label"], v["text"]});
        return compare_runs(shipped(name), variants, fixture);
    };
    const ComparisonTable wz = table("workzone");
    const ComparisonTable mep = table("mep");
    const ComparisonTable cem = table("cement");
    for (const auto* t : {&wz, &mep, &cem}) {
        for (const auto& c : t->columns) {
            if (!c.metrics) return {false, "column " + c.label + " failed: " + c.error};
        }
    }
    const auto& empty = *wz.columns[0].metrics;
    const auto& busy = *wz.columns[1].metrics;
    const auto& base = *wz.columns[2].metrics;
    const auto& installed = *mep.columns[0].metrics;
    const auto& ongoing = *mep.columns[1].metrics;
    const auto& dried = *cem.columns[0].metrics;
    const auto& wet = *cem.columns[1].metrics;

    // Fused posteriors per column, two decimals.
    const std::vector<std::vector<double>> expected_post{{0.21, 0.21}, {0.86, 0.29}, {0.36, 0.21},
                                                         {0.71, 0.57}, {0.21, 0.71, 0.21}, {0.71, 0.29, 0.21}};
    const std::vector<const ComparisonColumn*> cols{&wz.columns[0], &wz.columns[1], &mep.columns[0],
                                                    &mep.columns[1], &cem.columns[0], &cem.columns[1]};
    for (std::size_t i = 0; i < cols.size(); ++i) {
        for (std::size_t k = 0; k < expected_post[i].size(); ++k) {
            if (std::round(*cols[i]->posteriors[k] * 100) != std::round(expected_post[i][k] * 100)) {
                return {false, "posterior mismatch in column " + cols[i]->label};
            }
        }
    }

    struct Check {
        std::string what;
        double lhs, rhs;
    };
    const std::vector<Check> checks{
        {"busy length > empty length", busy.length_cells, empty.length_cells},
        {"busy min > empty min", *busy.min_obstacle_dist_m, *empty.min_obstacle_dist_m},
        {"empty min > baseline min", *empty.min_obstacle_dist_m, *base.min_obstacle_dist_m},
        {"ongoing length > installed length", ongoing.length_cells, installed.length_cells},
        {"wet length > dried length", wet.length_cells, dried.length_cells},
        {"wet min > dried min", *wet.min_obstacle_dist_m, *dried.min_obstacle_dist_m},
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : checks) {
        const bool holds = c.lhs > c.rhs;
        ok = ok && holds;
        detail += (detail.empty() ? "" : "; ") + c.what + " (" + fmt(c.lhs, 4) + " vs " + fmt(c.rhs, 4) + ")" +
                  (holds ? "" : " VIOLATED");
    }
    return {ok, detail};
}

Outcome trust_sweep_closed_form() {
    MockBackend mock({MockBackend::Rule{"fixed", {}, {{"hot", 0.9}, {"cold", 0.1}, {"sure", 1.0}}, 0.5}});
    const SensorQuery q{"deterministic", {{"hot", ""}, {"cold", ""}, {"sure", ""}}, "v1"};
    const std::vector<double> ns{0, 1, 2, 5, 10, 50};
    const auto points = trust_sweep(q, mock, ns, FusionParams{});
    const double p[] = {0.9, 0.1, 1.0};
    double worst = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            worst = std::max(worst, std::abs(points[i].posteriors[k].mean - (1 + ns[i] * p[k]) / (2 + ns[i])));
        }
    }
    return {worst <= 1e-12, "N in {0,1,2,5,10,50}, scores {0.9,0.1,1.0}: max |mean - (1+Np)/(2+N)| " + fmt(worst) +
                                " (tolerance 1e-12)"};
}

Outcome ablation_harness() {
    const int runs = 10'000;
    MockBackend mock({MockBackend::Rule{"saw", {{"chainsaw"}}, {{"chainsaw", 0.7}}, 0.2}});
    mock.set_noise(MockBackend::parse_noise_spec("chainsaw=0.6/0.7/0.8"), 4242);
    const SensorQuery q{"A chainsaw is running near the chair.", {{"chainsaw", "tool"}, {"chair", "furniture"}}, "v1"};
    const auto stats = ablation_run(q, mock, runs, FusionParams{});

    // Posterior mean (1 + 5p)/7 with p uniform on {0.6, 0.7, 0.8}.
    const double mu = (1 + 5 * 0.7) / 7;
    const double dev = 5 * 0.1 / 7;               // deviation of the two outer values
    const double var = 2.0 / 3.0 * dev * dev;     // population variance
    const double sigma = std::sqrt(var);
    const double mu4 = 2.0 / 3.0 * std::pow(dev, 4);
    const double n = runs;
    const double se_mean = sigma / std::sqrt(n);
    // Delta method on the sample variance: Var(s^2) = (mu4 - var^2 (n-3)/(n-1)) / n.
    const double se_var = std::sqrt((mu4 - var * var * (n - 3) / (n - 1)) / n);
    const double se_std = se_var / (2 * sigma);

    const double z_mean = (stats[0].mean - mu) / se_mean;
    const double z_std = (stats[0].stddev - sigma) / se_std;
    const bool chair_ok = std::abs(stats[1].mean - 2.0 / 7) < 1e-12 && stats[1].stddev < 1e-12;
    const bool ok = std::abs(z_mean) <= 3 && std::abs(z_std) <= 3 && chair_ok;
    return {ok, "10^4 runs: chainsaw mean " + fmt(stats[0].mean, 5) + " vs " + fmt(mu, 5) + " (z=" + fmt(z_mean, 3) +
                    "), std " + fmt(stats[0].stddev, 5) + " vs " + fmt(sigma, 5) + " (z=" + fmt(z_std, 3) +
                    "), bound |z| <= 3; deterministic chair " + fmt(stats[1].mean, 5) + " +- " +
                    fmt(stats[1].stddev, 3)};
}

Outcome sensor_robustness() {
    const SessionState s0 = replan(SessionState::create(shipped("workzone")));
    const std::string before = to_json(s0).dump();
    const ScalarField field_before = s0.total_field();

    struct Case {
        std::string name;
        std::string raw;
        bool expect_error;
    };
    const std::vector<Case> cases{
        {"malformed", "Sorry, I cannot help with that.", true},
        {"incomplete", R"({"scores": {"ws": 0.9}})", true},
        {"out-of-range", R"({"scores": {"ws": 1.7, "wall": -0.4}})", false},
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        ScriptedBackend backend({c.raw});
        Session session(s0);
        bool errored = false;
        std::string note;
        try {
            const auto next = session.apply_prompt("status", backend);
            std::map<std::string, double> got;
            for (const auto& reading : next->prompt_log().back().readings) got[reading.obstacle_id] = reading.score;
            const bool clamped = got["ws"] == 1.0 && got["wall"] == 0.0;
            note = clamped ? "clamped to (1, 0)" : "NOT clamped";
            ok = ok && clamped;
        } catch (const SensorError& e) {
            errored = true;
            note = "error after " + std::to_string(e.audit().size()) + " attempts";
        }
        const bool unchanged = to_json(*session.snapshot()).dump() == before &&
                               session.snapshot()->total_field() == field_before && *session.snapshot() == s0;
        if (c.expect_error) {
            ok = ok && errored && unchanged;
            note += unchanged ? ", state unchanged" : ", STATE CHANGED";
        } else {
            ok = ok && !errored;
        }
        detail += (detail.empty() ? "" : "; ") + c.name + ": " + note;
    }
    return {ok, detail};
}

}  // namespace

int main() {
    std::cout << "semcost acceptance\n";
    run("fusion arithmetic", 5.0, fusion_arithmetic);
    run("stability fuzz", 5.0, stability_fuzz);
    run("EDF oracle equivalence", 30.0, edf_oracle);
    run("A* reduction", 60.0, astar_reduction);
    run("suboptimality bound", 120.0, suboptimality_bound);
    run("behavioral orderings", 10.0, behavioral_orderings);
    run("trust-sweep closed form", 5.0, trust_sweep_closed_form);
    run("ablation harness", 10.0, ablation_harness);
    run("sensor robustness", 5.0, sensor_robustness);
    std::cout << (failures == 0 ? "all criteria passed\n" : std::to_string(failures) + " criteria failed\n");
    return failures == 0 ? 0 : 1;
}
