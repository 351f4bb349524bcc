// semcost command-line front end.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "semcost/metrics.hpp"
#include "semcost/serialize.hpp"
#include "semcost/service.hpp"
#include "semcost/session.hpp"

using namespace semcost;
using nlohmann::json;

namespace {

struct BackendOptions {
    std::string backend = "mock";
    std::string fixtures;
    std::string mock_rules;
    std::string noise;
    std::uint64_t seed = 1;
    std::string llm_url = "https://api.openai.com";
    std::string llm_model;

    void add_to(CLI::App* cmd, bool with_kind = true) {
        if (with_kind) {
            cmd->add_option("--backend", backend, "Sensor backend")
                ->check(CLI::IsMember({"mock", "fixture", "http"}))
                ->capture_default_str();
        }
        cmd->add_option("--fixtures", fixtures, "Fixture file for the fixture backend")->check(CLI::ExistingFile);
        cmd->add_option("--mock-rules", mock_rules, "Rule table for the mock backend")->check(CLI::ExistingFile);
        cmd->add_option("--noise", noise, "Mock noise, e.g. \"ws=0.6/0.7/0.8;wall=0.1/0.2\"");
        cmd->add_option("--seed", seed, "Seed for mock noise")->capture_default_str();
        cmd->add_option("--llm-url", llm_url, "Base URL of the chat completion API")->capture_default_str();
        cmd->add_option("--llm-model", llm_model, "Model name (default: $SEMCOST_LLM_MODEL)");
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::unique_ptr<SensorBackend> make_mock(const BackendOptions& o) {
    auto mock = std::make_unique<MockBackend>(o.mock_rules.empty() ? MockBackend(MockBackend::construction_rules())
                                                                   : MockBackend::from_json_text(read_file(o.mock_rules)));
    if (!o.noise.empty()) mock->set_noise(MockBackend::parse_noise_spec(o.noise), o.seed);
    return mock;
}

std::unique_ptr<SensorBackend> make_http(const BackendOptions& o) {
    HttpBackendConfig config;
    config.base_url = o.llm_url;
    config.model = o.llm_model;
    return std::make_unique<HttpBackend>(config);
}

std::unique_ptr<SensorBackend> make_backend(const BackendOptions& o) {
    switch (backend_kind_from_string(o.backend)) {
        case BackendKind::Mock:
            return make_mock(o);
        case BackendKind::Fixture:
            if (o.fixtures.empty()) throw PreconditionError("--backend fixture needs --fixtures FILE");
            return std::make_unique<FixtureBackend>(FixtureBackend::from_file(o.fixtures));
        case BackendKind::Http:
            return make_http(o);
    }
    throw PreconditionError("unknown backend");
}

std::vector<PromptVariant> load_variants(const std::string& path) {
    const json j = json::parse(read_file(path));
    const json& arr = j.is_object() && j.contains("variants") ? j["variants"] : j;
    if (!arr.is_array()) throw ValidationError("variants", "expected an array of {label, text}");
    std::vector<PromptVariant> out;
    for (const auto& v : arr) {
        if (v.is_string()) {
            out.push_back({v.get<std::string>(), v.get<std::string>()});
        } else if (v.is_object() && v.contains("text") && v["text"].is_string()) {
            out.push_back({v.value("label", v["text"].get<std::string>()), v["text"].get<std::string>()});
        } else {
            throw ValidationError("variants", "each variant needs a \"text\" string");
        }
    }
    return out;
}

std::string format_stats(const std::vector<PosteriorStat>& stats) {
    std::ostringstream out;
    out << std::left << std::setw(16) << "obstacle" << std::right << std::setw(10) << "mean" << std::setw(10) << "std"
        << "\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& s : stats) {
        out << std::left << std::setw(16) << s.obstacle_id << std::right << std::setw(10) << s.mean << std::setw(10)
            << s.stddev << "\n";
    }
    return out.str();
}

json stats_json(const std::vector<PosteriorStat>& stats) {
    json arr = json::array();
    for (const auto& s : stats) arr.push_back({{"obstacle_id", s.obstacle_id}, {"mean", s.mean}, {"std", s.stddev}});
    return arr;
}

std::vector<double> parse_n_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ValidationError("n-values", "not a number: \"" + item + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("n-values", "empty list");
    return out;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Danger-aware grid path planner driven by language-model danger scores"};
    app.require_subcommand(1);

    std::string scenario_path;
    bool as_json = false;

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Plan once on the scenario's prior beliefs and print path metrics");
    std::optional<double> gamma, w1, w2;
    plan_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("--gamma", gamma, "Potential weight in the edge cost");
    plan_cmd->add_option("--w1", w1, "Heuristic inflation");
    plan_cmd->add_option("--w2", w2, "Informed-vs-anchor factor");

    // prompt
    auto* prompt_cmd = app.add_subcommand("prompt", "Apply one prompt, replan, print the table column");
    std::string text;
    std::optional<double> trust;
    std::string session_path;
    BackendOptions prompt_backend;
    prompt_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    prompt_cmd->add_option("--text", text, "Prompt text")->required();
    prompt_cmd->add_option("--trust", trust, "Trust N for this prompt");
    prompt_cmd->add_option("--session", session_path, "Session file to continue and update");
    prompt_backend.add_to(prompt_cmd);
    prompt_cmd->add_flag("--json", as_json, "Print the session snapshot as JSON");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "Compare prompt variants against an A* baseline");
    std::string prompts_path;
    BackendOptions compare_backend;
    compare_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    compare_cmd->add_option("--prompts", prompts_path, "JSON array of {label, text}")->required()->check(CLI::ExistingFile);
    compare_cmd->add_option("--trust", trust, "Trust N for every variant");
    compare_backend.add_to(compare_cmd);
    compare_cmd->add_flag("--json", as_json, "Print the table as JSON");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "Posterior mean and std over repeated independent prompts");
    int runs = 100;
    BackendOptions ablate_backend;
    ablate_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    ablate_cmd->add_option("--text", text, "Prompt text")->required();
    ablate_cmd->add_option("--runs", runs, "Independent runs")->check(CLI::Range(2, 100000000))->capture_default_str();
    ablate_cmd->add_option("--trust", trust, "Trust N");
    ablate_backend.add_to(ablate_cmd);
    ablate_cmd->add_flag("--json", as_json, "Print JSON");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Posterior means as a function of the trust knob N");
    std::string n_values = "0,1,2,5,10,50";
    int queries_per_n = 1;
    BackendOptions sweep_backend;
    sweep_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--text", text, "Prompt text")->required();
    sweep_cmd->add_option("--n-values", n_values, "Comma-separated trust values")->capture_default_str();
    sweep_cmd->add_option("--queries-per-n", queries_per_n, "Sensor calls per N")->check(CLI::PositiveNumber);
    sweep_backend.add_to(sweep_cmd);

    // request
    auto* request_cmd = app.add_subcommand("request", "Print the rendered sensor request and its fixture hash");
    request_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    request_cmd->add_option("--text", text, "Prompt text")->required();
    request_cmd->add_flag("--json", as_json, "Print {request_hash, prompt, request}");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the session HTTP service");
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string state_dir = "semcost-state";
    std::string token;
    BackendOptions serve_backend;
    serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(0, 65535))->capture_default_str();
    serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--state-dir", state_dir, "Directory for persisted sessions")->capture_default_str();
    serve_cmd->add_option("--token", token, "Require this bearer token (default: $SEMCOST_SERVICE_TOKEN)");
    serve_backend.add_to(serve_cmd, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan_cmd) {
            const SessionState state = SessionState::create(load_scenario_file(scenario_path));
            PlannerParams params = state.scenario().planner_params;
            if (gamma) params.gamma = *gamma;
            if (w1) params.w1 = *w1;
            if (w2) params.w2 = *w2;
            const SessionState planned = replan(state, params);
            json out = to_json(*planned.last_plan());
            out["scenario"] = planned.scenario().name;
            std::cout << out.dump(2) << "\n";
        } else if (*prompt_cmd) {
            const Scenario scenario = load_scenario_file(scenario_path);
            SessionState state = !session_path.empty() && std::filesystem::exists(session_path)
                                     ? load_state(session_path)
                                     : SessionState::create(scenario);
            auto backend = make_backend(prompt_backend);
            PromptOptions options;
            options.trust_n = trust;
            state = replan(apply_prompt(state, text, *backend, options));
            if (!session_path.empty()) save_state(state, session_path);
            if (as_json) {
                std::cout << snapshot_json(state).dump(2) << "\n";
            } else {
                ComparisonTable table;
                for (const auto& o : state.grid().obstacles) table.obstacle_labels.push_back(o.id);
                ComparisonColumn col;
                col.label = text;
                col.metrics = state.last_plan()->metrics;
                for (const auto& b : state.beliefs()) col.posteriors.push_back(posterior_mean(b.state));
                table.columns.push_back(col);
                std::cout << render_table(table);
            }
        } else if (*compare_cmd) {
            auto backend = make_backend(compare_backend);
            PromptOptions options;
            options.trust_n = trust;
            const auto table = compare_runs(load_scenario_file(scenario_path), load_variants(prompts_path), *backend, options);
            std::cout << (as_json ? to_json(table).dump(2) + "\n" : render_table(table));
        } else if (*ablate_cmd) {
            const Scenario scenario = load_scenario_file(scenario_path);
            auto backend = make_backend(ablate_backend);
            FusionParams fusion = scenario.fusion_params;
            if (trust) fusion.trust_n = *trust;
            const auto stats = ablation_run(sensor_query(scenario, text), *backend, runs, fusion);
            if (as_json) {
                std::cout << json{{"runs", runs}, {"trust_n", fusion.trust_n}, {"posteriors", stats_json(stats)}}.dump(2)
                          << "\n";
            } else {
                std::cout << "runs: " << runs << ", trust N: " << fusion.trust_n << "\n" << format_stats(stats);
            }
        } else if (*sweep_cmd) {
            const Scenario scenario = load_scenario_file(scenario_path);
            auto backend = make_backend(sweep_backend);
            const auto points = trust_sweep(sensor_query(scenario, text), *backend, parse_n_values(n_values),
                                            scenario.fusion_params, queries_per_n);
            json arr = json::array();
            for (const auto& p : points) arr.push_back({{"trust_n", p.trust_n}, {"posteriors", stats_json(p.posteriors)}});
            std::cout << json{{"prompt", text}, {"queries_per_n", queries_per_n}, {"points", std::move(arr)}}.dump(2)
                      << "\n";
        } else if (*request_cmd) {
            const SensorRequest request = build_messages(sensor_query(load_scenario_file(scenario_path), text));
            if (as_json) {
                std::cout << json{{"request_hash", request.hash()}, {"prompt", text}, {"request", request.text()}}.dump(2)
                          << "\n";
            } else {
                std::cout << "hash: " << request.hash() << "\n" << request.text();
            }
        } else if (*serve_cmd) {
            if (token.empty()) {
                if (const char* env = std::getenv("SEMCOST_SERVICE_TOKEN")) token = env;
            }
            Service service(ServiceConfig{state_dir, token});
            service.set_backend(BackendKind::Mock, make_mock(serve_backend));
            if (!serve_backend.fixtures.empty()) {
                service.set_backend(BackendKind::Fixture,
                                    std::make_unique<FixtureBackend>(FixtureBackend::from_file(serve_backend.fixtures)));
            }
            service.set_backend(BackendKind::Http, make_http(serve_backend));
            for (const auto& problem : service.restore_sessions()) std::cerr << "skipped " << problem << "\n";

            httplib::Server server;
            service.register_routes(server);
            g_server = &server;
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            if (port == 0) {
                port = server.bind_to_any_port(host);
            } else if (!server.bind_to_port(host, port)) {
                std::cerr << "error: cannot bind " << host << ":" << port << "\n";
                return 1;
            }
            std::cerr << "listening on http://" << host << ":" << port << " (" << service.session_ids().size()
                      << " sessions restored)\n";
            server.listen_after_bind();
        }
    } catch (const SensorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& line : e.audit()) std::cerr << "  " << line << "\n";
        if (!e.raw().empty()) std::cerr << "raw output: " << e.raw() << "\n";
        return 3;
    } catch (const NoPathError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
