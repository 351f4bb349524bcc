#include "semcost/service.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "json_reader.hpp"
#include "semcost/serialize.hpp"

namespace semcost {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::regex kSessionIdPattern("[0-9a-f]{16}");

/// Failure with an explicit HTTP status and error code.
class HttpError : public Error {
public:
    HttpError(int status, std::string code, const std::string& message, json detail = json::object())
        : Error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}
    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }
    const json& detail() const noexcept { return detail_; }

private:
    int status_;
    std::string code_;
    json detail_;
};

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                json detail = json::object()) {
    send_json(res, status, json{{"code", code}, {"message", message}, {"detail", std::move(detail)}});
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const HttpError& e) {
        send_error(res, e.status(), e.code(), e.what(), e.detail());
    } catch (const SensorError& e) {
        send_error(res, 502, "sensor_error", e.what(), json{{"raw", e.raw()}, {"audit", e.audit()}});
    } catch (const NoPathError& e) {
        send_error(res, 422, "no_path", e.what(),
                   json{{"expansions", {{"anchor", e.stats().anchor_count}, {"informed", e.stats().informed_count}}}});
    } catch (const ValidationError& e) {
        send_error(res, 400, "invalid_field", e.what(), json{{"field", e.field()}});
    } catch (const ParseError& e) {
        send_error(res, 400, "parse_error", e.what());
    } catch (const PreconditionError& e) {
        send_error(res, 422, "precondition_failed", e.what());
    } catch (const StateError& e) {
        send_error(res, 409, "state_error", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal_error", e.what());
    }
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw HttpError(400, "parse_error", std::string("request body is not valid JSON: ") + e.what());
    }
}

std::string new_session_id() {
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    return buf;
}

PlannerParams planner_override(const json& j, PlannerParams params) {
    detail::ObjectReader r(j, "planner");
    params.w1 = r.number_or("w1", params.w1);
    params.w2 = r.number_or("w2", params.w2);
    params.gamma = r.number_or("gamma", params.gamma);
    params.connectivity = r.integer_or("connectivity", params.connectivity);
    r.finish();
    validate(params);
    return params;
}

json field_json(const SessionState& state, const std::string& kind) {
    const auto& grid = state.grid();
    ScalarField field;
    std::string units;
    if (kind == "edf") {
        field = state.global_edf();
        units = "cells";
    } else if (kind == "potential") {
        field = state.total_field();
        units = "potential";
    } else if (kind == "combined") {
        const Cell goal = state.scenario().goal_cell;
        const double gamma = state.scenario().planner_params.gamma;
        field = ScalarField(grid.width, grid.height);
        for (int r = 0; r < grid.height; ++r) {
            for (int c = 0; c < grid.width; ++c) {
                const Cell cell{c, r};
                const double h0 = std::hypot(double(c - goal.col), double(r - goal.row));
                field[cell] = h0 + gamma * state.total_field()[cell];
            }
        }
        units = "cost";
    } else {
        throw HttpError(400, "invalid_field", "kind must be edf, potential or combined", json{{"field", "kind"}});
    }
    json out = to_json(field);
    out["kind"] = kind;
    out["units"] = units;
    out["resolution_m"] = grid.resolution_m;
    return out;
}

}  // namespace

struct Service::BackendSlot {
    std::mutex mutex;
    std::unique_ptr<SensorBackend> backend;
};

namespace {

/// Serializes calls into a shared backend.
class LockedBackend : public SensorBackend {
public:
    LockedBackend(SensorBackend& inner, std::mutex& mutex) : inner_(inner), mutex_(mutex) {}
    BackendKind kind() const noexcept override { return inner_.kind(); }
    std::string complete(const SensorRequest& request, const SensorQuery& query) override {
        std::lock_guard lock(mutex_);
        return inner_.complete(request, query);
    }

private:
    SensorBackend& inner_;
    std::mutex& mutex_;
};

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
    if (!config_.state_dir.empty()) fs::create_directories(config_.state_dir);
}

Service::~Service() = default;

void Service::set_backend(BackendKind kind, std::unique_ptr<SensorBackend> backend) {
    auto slot = std::make_unique<BackendSlot>();
    slot->backend = std::move(backend);
    std::lock_guard lock(mutex_);
    backends_[kind] = std::move(slot);
}

Service::BackendSlot& Service::backend(BackendKind kind) {
    std::lock_guard lock(mutex_);
    auto it = backends_.find(kind);
    if (it == backends_.end() || !it->second->backend) {
        throw HttpError(503, "backend_unavailable", "sensor backend \"" + to_string(kind) + "\" is not configured");
    }
    return *it->second;
}

std::vector<std::string> Service::restore_sessions() {
    std::vector<std::string> problems;
    if (config_.state_dir.empty()) return problems;
    for (const auto& entry : fs::directory_iterator(config_.state_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        const std::string id = entry.path().stem().string();
        if (!std::regex_match(id, kSessionIdPattern)) continue;
        try {
            auto session = std::make_shared<Session>(load_state(entry.path().string()));
            std::lock_guard lock(mutex_);
            sessions_[id] = std::move(session);
        } catch (const Error& e) {
            problems.push_back(entry.path().string() + ": " + e.what());
        }
    }
    return problems;
}

std::string Service::create_session(Scenario scenario) {
    auto session = std::make_shared<Session>(SessionState::create(std::move(scenario)));
    std::string id;
    {
        std::lock_guard lock(mutex_);
        do {
            id = new_session_id();
        } while (sessions_.count(id));
        sessions_[id] = session;
    }
    persist(id, *session->snapshot());
    return id;
}

std::shared_ptr<Session> Service::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError(404, "not_found", "no session \"" + id + "\"");
    return it->second;
}

std::vector<std::string> Service::session_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    return ids;
}

void Service::persist(const std::string& id, const SessionState& state) const {
    if (config_.state_dir.empty()) return;
    save_state(state, (fs::path(config_.state_dir) / (id + ".json")).string());
}

void Service::register_routes(httplib::Server& server) {
    if (!config_.token.empty()) {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (req.get_header_value("Authorization") == "Bearer " + config_.token) {
                return httplib::Server::HandlerResponse::Unhandled;
            }
            send_error(res, 401, "unauthorized", "missing or wrong bearer token");
            return httplib::Server::HandlerResponse::Handled;
        });
    }

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            detail::ObjectReader r(body, "");
            Scenario scenario = scenario_from_json(r.at("scenario"));
            r.finish();
            send_json(res, 201, json{{"session_id", create_session(std::move(scenario))}});
        });
    });

    server.Get(R"(/sessions/([0-9a-zA-Z]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, snapshot_json(*find(req.matches[1])->snapshot())); });
    });

    server.Post(R"(/sessions/([0-9a-zA-Z]+)/prompt)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            auto session = find(id);
            const json body = parse_body(req);
            detail::ObjectReader r(body, "");
            const std::string text = r.string("text");
            const std::string backend_name = r.string_or("backend", "mock");
            PromptOptions options;
            if (r.has("trust_n")) options.trust_n = r.number("trust_n");
            r.finish();
            BackendKind kind;
            try {
                kind = backend_kind_from_string(backend_name);
            } catch (const PreconditionError& e) {
                throw HttpError(400, "invalid_field", e.what(), json{{"field", "backend"}});
            }
            BackendSlot& slot = backend(kind);
            LockedBackend locked(*slot.backend, slot.mutex);
            auto state = session->apply_prompt(text, locked, options);
            persist(id, *state);
            send_json(res, 200, snapshot_json(*state));
        });
    });

    server.Post(R"(/sessions/([0-9a-zA-Z]+)/plan)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            auto session = find(id);
            const json body = parse_body(req);
            detail::ObjectReader r(body, "");
            std::optional<PlannerParams> params;
            if (r.has("planner")) params = planner_override(r.at("planner"), session->snapshot()->scenario().planner_params);
            r.finish();
            auto state = session->replan(params);
            persist(id, *state);
            send_json(res, 200, to_json(*state->last_plan()));
        });
    });

    server.Post(R"(/sessions/([0-9a-zA-Z]+)/undo)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            auto state = find(id)->undo();
            persist(id, *state);
            send_json(res, 200, snapshot_json(*state));
        });
    });

    server.Get(R"(/sessions/([0-9a-zA-Z]+)/field)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto state = find(req.matches[1])->snapshot();
            const std::string kind = req.has_param("kind") ? req.get_param_value("kind") : "potential";
            send_json(res, 200, field_json(*state, kind));
        });
    });

    server.Get(R"(/sessions/([0-9a-zA-Z]+)/path)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto state = find(req.matches[1])->snapshot();
            if (!state->last_plan()) throw HttpError(409, "state_error", "no plan yet; POST /plan first");
            json path = json::array();
            for (Cell c : state->last_plan()->path) path.push_back(to_json(c));
            send_json(res, 200, json{{"path", std::move(path)}, {"total_cost", state->last_plan()->total_cost}});
        });
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            send_error(res, res.status, res.status == 404 ? "not_found" : "http_error", "no such route");
        }
    });
}

}  // namespace semcost
