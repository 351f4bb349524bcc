#include "semcost/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "json_reader.hpp"
#include "semcost/distance_field.hpp"
#include "semcost/hash.hpp"
#include "semcost/serialize.hpp"

namespace semcost {

using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> obstacle_labels(const SemanticGrid& grid) {
    std::set<std::string> families;
    bool unique = true;
    for (const auto& o : grid.obstacles) unique = unique && !o.family.empty() && families.insert(o.family).second;
    std::vector<std::string> labels;
    for (const auto& o : grid.obstacles) {
        if (unique) {
            labels.push_back(o.family);
        } else {
            labels.push_back(o.family.empty() ? o.id : o.id + " [" + o.family + "]");
        }
    }
    return labels;
}

json record_to_json(const PromptRecord& r) {
    json readings = json::array();
    for (const auto& d : r.readings) readings.push_back(to_json(d));
    return json{{"prompt_id", r.prompt_id},
                {"text", r.text},
                {"trust_n", r.trust_n},
                {"timestamp", r.timestamp},
                {"readings", std::move(readings)}};
}

PromptRecord record_from_json(const json& j) {
    detail::ObjectReader r(j, "prompt_log[]");
    PromptRecord rec;
    rec.prompt_id = r.string("prompt_id");
    rec.text = r.string("text");
    rec.trust_n = r.number("trust_n");
    rec.timestamp = r.string_or("timestamp", "");
    for (const auto& d : detail::read_array(r.at("readings"), "prompt_log[].readings")) {
        rec.readings.push_back(reading_from_json(d));
    }
    r.finish();
    return rec;
}

json beliefs_to_json(const std::vector<ObstacleBelief>& beliefs, const SemanticGrid& grid) {
    json arr = json::array();
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        json b = to_json(beliefs[i]);
        b["id"] = grid.obstacles[i].id;
        arr.push_back(std::move(b));
    }
    return arr;
}

std::vector<ObstacleBelief> beliefs_from_json(const json& j, const Scenario& scenario, const std::string& field) {
    const auto& arr = detail::read_array(j, field);
    if (arr.size() != scenario.obstacles.size()) {
        throw ValidationError(field, "expected one belief per obstacle");
    }
    std::vector<ObstacleBelief> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        json item = arr[i];
        if (!item.is_object() || item.value("id", std::string()) != scenario.obstacles[i].id) {
            throw ValidationError(detail::index_path(field, i), "belief does not match obstacle order");
        }
        item.erase("id");
        out.push_back(belief_from_json(item));
    }
    return out;
}

json optional_plan(const std::optional<PlanResult>& p) { return p ? to_json(*p) : json(nullptr); }

std::optional<PlanResult> optional_plan_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return plan_from_json(j);
}

}  // namespace

// ---------------------------------------------------------------------------
// SessionState

SessionState SessionState::create(Scenario scenario) {
    validate(scenario);
    auto geometry = std::make_shared<SessionGeometry>();
    geometry->grid = rasterize(scenario);
    geometry->distance_fields = per_obstacle_edfs(geometry->grid);
    geometry->global_edf = semcost::global_edf(geometry->distance_fields, geometry->grid.width, geometry->grid.height);

    SessionState s;
    s.geometry_ = std::move(geometry);
    const BetaState prior = reset(scenario.fusion_params);
    s.beliefs_.assign(s.geometry_->grid.obstacles.size(), ObstacleBelief{prior, {}});
    s.scenario_ = std::move(scenario);
    s.rebuild_field();
    return s;
}

void SessionState::rebuild_field() {
    std::vector<double> gains;
    gains.reserve(beliefs_.size());
    for (std::size_t i = 0; i < beliefs_.size(); ++i) {
        gains.push_back(effective_gain(beliefs_[i].state, geometry_->grid.obstacles[i].base_gain));
    }
    if (potential_.shared_distances().get() != &geometry_->distance_fields) {
        PotentialStack::DistanceFields shared(geometry_, &geometry_->distance_fields);
        potential_ = PotentialStack(std::move(shared), std::move(gains), geometry_->grid.width, geometry_->grid.height);
    } else {
        potential_.set_gains(std::move(gains));
    }
}

SessionState SessionState::with_readings(PromptRecord record) const {
    validate(FusionParams{record.trust_n, 1.0, 1.0});
    const auto& obstacles = geometry_->grid.obstacles;
    for (const auto& d : record.readings) {
        const bool known = std::any_of(obstacles.begin(), obstacles.end(), [&](const Obstacle& o) { return o.id == d.obstacle_id; });
        if (!known) throw PreconditionError("reading for unknown obstacle \"" + d.obstacle_id + "\"");
    }

    SessionState next = *this;
    next.undo_.push_back(UndoEntry{beliefs_, log_.size(), last_plan_});
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const DangerReading* reading = nullptr;
        for (const auto& d : record.readings) {
            if (d.obstacle_id != obstacles[i].id) continue;
            if (reading) throw PreconditionError("two readings for obstacle \"" + d.obstacle_id + "\"");
            reading = &d;
        }
        if (!reading) throw PreconditionError("no reading for obstacle \"" + obstacles[i].id + "\"");
        auto& belief = next.beliefs_[i];
        belief.state = update(belief.state, reading->score, record.trust_n);
        belief.history.push_back({record.prompt_id, belief.state.alpha, belief.state.beta});
    }
    next.rebuild_field();
    next.log_.push_back(std::move(record));
    return next;
}

SessionState SessionState::with_plan(PlanResult plan) const {
    SessionState next = *this;
    next.last_plan_ = std::move(plan);
    return next;
}

SessionState SessionState::undone() const {
    if (undo_.empty()) throw StateError("nothing to undo");
    SessionState prev = *this;
    UndoEntry entry = std::move(prev.undo_.back());
    prev.undo_.pop_back();
    prev.beliefs_ = std::move(entry.beliefs);
    prev.log_.resize(entry.log_size);
    prev.last_plan_ = std::move(entry.last_plan);
    prev.rebuild_field();
    return prev;
}

SessionState SessionState::restore(Scenario scenario, std::vector<ObstacleBelief> beliefs, std::vector<PromptRecord> log,
                                   std::optional<PlanResult> last_plan, std::vector<UndoEntry> undo) {
    SessionState s = create(std::move(scenario));
    if (beliefs.size() != s.beliefs_.size()) throw StateError("belief count does not match the scenario");
    for (const auto& entry : undo) {
        if (entry.beliefs.size() != s.beliefs_.size() || entry.log_size > log.size()) {
            throw StateError("undo entry does not match the scenario");
        }
    }
    s.beliefs_ = std::move(beliefs);
    s.log_ = std::move(log);
    s.last_plan_ = std::move(last_plan);
    s.undo_ = std::move(undo);
    s.rebuild_field();
    return s;
}

bool operator==(const SessionState& a, const SessionState& b) {
    const bool same_geometry = a.geometry_ == b.geometry_ || (a.geometry_ && b.geometry_ && a.geometry_->grid == b.geometry_->grid);
    return same_geometry && a.scenario_ == b.scenario_ && a.beliefs_ == b.beliefs_ && a.gains() == b.gains() &&
           a.total_field() == b.total_field() && a.log_ == b.log_ && a.last_plan_ == b.last_plan_ && a.undo_ == b.undo_;
}

// ---------------------------------------------------------------------------
// Operations

SensorQuery sensor_query(const Scenario& scenario, std::string_view text) {
    SensorQuery q;
    q.prompt = std::string(text);
    for (const auto& o : scenario.obstacles) q.obstacles.push_back({o.id, o.family});
    return q;
}

std::string make_prompt_id(std::string_view text, std::size_t index) {
    return stable_hash(std::string(text) + "#" + std::to_string(index));
}

SessionState apply_prompt(const SessionState& state, std::string_view text, SensorBackend& backend,
                          const PromptOptions& options) {
    const double trust = options.trust_n.value_or(state.scenario().fusion_params.trust_n);
    if (!std::isfinite(trust) || trust < 0.0) throw PreconditionError("trust N must be a finite value >= 0");
    const std::string prompt_id = make_prompt_id(text, state.prompt_log().size());
    const SensorResponse response = score_obstacles(sensor_query(state.scenario(), text), backend, prompt_id, options.retries);

    PromptRecord record;
    record.prompt_id = prompt_id;
    record.text = std::string(text);
    record.readings = response.readings;
    record.trust_n = trust;
    record.timestamp = options.timestamp.value_or(utc_now());
    return state.with_readings(std::move(record));
}

SessionState replan(const SessionState& state, const std::optional<PlannerParams>& params) {
    const Scenario& sc = state.scenario();
    PlanResult result = plan(state.grid(), state.total_field(), sc.start_cell, sc.goal_cell,
                             params.value_or(sc.planner_params));
    result.metrics = compute_metrics(result.path, state.global_edf(), sc.resolution_m);
    return state.with_plan(std::move(result));
}

SessionState undo(const SessionState& state) { return state.undone(); }

SessionState replay(const Scenario& scenario, const std::vector<PromptRecord>& log) {
    SessionState s = SessionState::create(scenario);
    for (const auto& record : log) s = s.with_readings(record);
    return s;
}

// ---------------------------------------------------------------------------
// Persistence

json to_json(const SessionState& state) {
    json log = json::array();
    for (const auto& r : state.prompt_log()) log.push_back(record_to_json(r));
    json undo = json::array();
    for (const auto& u : state.undo_stack()) {
        undo.push_back({{"beliefs", beliefs_to_json(u.beliefs, state.grid())},
                        {"log_size", u.log_size},
                        {"last_plan", optional_plan(u.last_plan)}});
    }
    return json{{"format", "semcost-session"},
                {"version", kSessionFormatVersion},
                {"scenario", to_json(state.scenario())},
                {"beliefs", beliefs_to_json(state.beliefs(), state.grid())},
                {"prompt_log", std::move(log)},
                {"last_plan", optional_plan(state.last_plan())},
                {"undo", std::move(undo)}};
}

SessionState session_from_json(const json& j) {
    try {
        detail::ObjectReader r(j, "");
        if (r.string("format") != "semcost-session") throw StateError("not a session file");
        const int version = r.integer("version");
        if (version != kSessionFormatVersion) {
            throw StateError("session file version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kSessionFormatVersion) + ")");
        }
        Scenario scenario = scenario_from_json(r.at("scenario"));
        auto beliefs = beliefs_from_json(r.at("beliefs"), scenario, "beliefs");
        std::vector<PromptRecord> log;
        for (const auto& item : detail::read_array(r.at("prompt_log"), "prompt_log")) {
            log.push_back(record_from_json(item));
        }
        auto last_plan = optional_plan_from_json(r.at("last_plan"));
        std::vector<SessionState::UndoEntry> undo;
        for (const auto& item : detail::read_array(r.at("undo"), "undo")) {
            detail::ObjectReader u(item, "undo[]");
            SessionState::UndoEntry entry;
            entry.beliefs = beliefs_from_json(u.at("beliefs"), scenario, "undo[].beliefs");
            entry.log_size = static_cast<std::size_t>(u.integer("log_size"));
            entry.last_plan = optional_plan_from_json(u.at("last_plan"));
            u.finish();
            undo.push_back(std::move(entry));
        }
        r.finish();
        return SessionState::restore(std::move(scenario), std::move(beliefs), std::move(log), std::move(last_plan),
                                     std::move(undo));
    } catch (const StateError&) {
        throw;
    } catch (const Error& e) {
        throw StateError(std::string("corrupt session state: ") + e.what());
    }
}

void save_state(const SessionState& state, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StateError("cannot write " + tmp);
        out << to_json(state).dump(2) << "\n";
        if (!out) throw StateError("failed writing " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw StateError("cannot replace " + path);
}

SessionState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StateError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw StateError(std::string("corrupt session state: ") + e.what());
    }
    return session_from_json(j);
}

json snapshot_json(const SessionState& state) {
    const auto& grid = state.grid();
    json posteriors = json::array();
    for (std::size_t i = 0; i < grid.obstacles.size(); ++i) {
        const auto& o = grid.obstacles[i];
        const auto& b = state.beliefs()[i];
        json history = json::array();
        for (const auto& h : b.history) {
            history.push_back({{"prompt_id", h.prompt_id}, {"alpha", h.alpha}, {"beta", h.beta},
                               {"mean", posterior_mean(BetaState{h.alpha, h.beta})}});
        }
        posteriors.push_back({{"id", o.id},
                              {"family", o.family},
                              {"alpha", b.state.alpha},
                              {"beta", b.state.beta},
                              {"mean", posterior_mean(b.state)},
                              {"base_gain", o.base_gain},
                              {"effective_gain", state.gains()[i]},
                              {"history", std::move(history)}});
    }
    json log = json::array();
    for (const auto& r : state.prompt_log()) log.push_back(record_to_json(r));
    const Scenario& sc = state.scenario();
    return json{{"name", sc.name},
                {"width", grid.width},
                {"height", grid.height},
                {"resolution_m", grid.resolution_m},
                {"start_cell", to_json(sc.start_cell)},
                {"goal_cell", to_json(sc.goal_cell)},
                {"trust_n", sc.fusion_params.trust_n},
                {"posteriors", std::move(posteriors)},
                {"prompt_log", std::move(log)},
                {"last_plan", optional_plan(state.last_plan())},
                {"undo_depth", state.undo_stack().size()}};
}

// ---------------------------------------------------------------------------
// Comparison runs

ComparisonTable compare_runs(const Scenario& scenario, const std::vector<PromptVariant>& variants,
                             SensorBackend& backend, const PromptOptions& options) {
    if (variants.empty()) throw PreconditionError("compare needs at least one prompt variant");
    const SessionState base = SessionState::create(scenario);
    ComparisonTable table;
    table.obstacle_labels = obstacle_labels(base.grid());

    for (const auto& v : variants) {
        ComparisonColumn col;
        col.label = v.label.empty() ? v.text : v.label;
        try {
            const SessionState s = replan(apply_prompt(base, v.text, backend, options));
            col.metrics = s.last_plan()->metrics;
            for (const auto& b : s.beliefs()) col.posteriors.push_back(posterior_mean(b.state));
        } catch (const Error& e) {
            col.error = e.what();
            col.posteriors.assign(table.obstacle_labels.size(), std::nullopt);
        }
        table.columns.push_back(std::move(col));
    }

    ComparisonColumn baseline;
    baseline.label = "A* Baseline";
    PlannerParams params = scenario.planner_params;
    params.gamma = 0.0;
    try {
        baseline.metrics = replan(base, params).last_plan()->metrics;
    } catch (const Error& e) {
        baseline.error = e.what();
    }
    baseline.posteriors.assign(table.obstacle_labels.size(), std::nullopt);
    table.columns.push_back(std::move(baseline));
    return table;
}

json to_json(const ComparisonTable& table) {
    json columns = json::array();
    for (const auto& c : table.columns) {
        json posteriors = json::array();
        for (const auto& p : c.posteriors) posteriors.push_back(p ? json(*p) : json(nullptr));
        json col = {{"label", c.label},
                    {"metrics", c.metrics ? to_json(*c.metrics) : json(nullptr)},
                    {"posteriors", std::move(posteriors)}};
        if (!c.error.empty()) col["error"] = c.error;
        columns.push_back(std::move(col));
    }
    return json{{"obstacles", table.obstacle_labels}, {"columns", std::move(columns)}};
}

// ---------------------------------------------------------------------------
// Session

Session::Session(SessionState initial) : current_(std::make_shared<const SessionState>(std::move(initial))) {}

std::shared_ptr<const SessionState> Session::snapshot() const {
    std::lock_guard lock(read_mutex_);
    return current_;
}

void Session::publish(SessionState next) {
    auto ptr = std::make_shared<const SessionState>(std::move(next));
    std::lock_guard lock(read_mutex_);
    current_ = std::move(ptr);
}

std::shared_ptr<const SessionState> Session::apply_prompt(std::string_view text, SensorBackend& backend,
                                                          const PromptOptions& options) {
    std::lock_guard writer(write_mutex_);
    const auto current = snapshot();
    try {
        publish(semcost::apply_prompt(*current, text, backend, options));
    } catch (const Error& e) {
        std::lock_guard lock(read_mutex_);
        errors_.push_back(utc_now() + " prompt rejected: " + e.what());
        throw;
    }
    return snapshot();
}

std::shared_ptr<const SessionState> Session::replan(const std::optional<PlannerParams>& params) {
    std::lock_guard writer(write_mutex_);
    publish(semcost::replan(*snapshot(), params));
    return snapshot();
}

std::shared_ptr<const SessionState> Session::undo() {
    std::lock_guard writer(write_mutex_);
    publish(semcost::undo(*snapshot()));
    return snapshot();
}

std::vector<std::string> Session::error_log() const {
    std::lock_guard lock(read_mutex_);
    return errors_;
}

}  // namespace semcost
