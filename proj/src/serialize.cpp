#include "semcost/serialize.hpp"

#include <cmath>

#include "json_reader.hpp"

namespace semcost {

using nlohmann::json;
using detail::ObjectReader;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional_number(ObjectReader& r, const std::string& key) {
    if (!r.has(key)) return std::nullopt;
    const json& v = r.at(key);
    if (v.is_null()) return std::nullopt;
    return detail::read_number(v, r.field(key));
}

}  // namespace

json to_json(const ScalarField& field) {
    json values = json::array();
    for (double v : field.values) values.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    return json{{"width", field.width}, {"height", field.height}, {"values", std::move(values)}};
}

ScalarField field_from_json(const json& j) {
    ObjectReader r(j, "field");
    ScalarField f(r.integer("width"), r.integer("height"));
    const auto& arr = detail::read_array(r.at("values"), "field.values");
    if (arr.size() != f.values.size()) throw ValidationError("field.values", "length does not match dimensions");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        f.values[i] = arr[i].is_null() ? kUnboundedDistance : detail::read_number(arr[i], "field.values");
    }
    r.finish();
    return f;
}

json to_json(const PathMetrics& m) {
    return json{{"length_cells", m.length_cells},
                {"length_m", m.length_m},
                {"min_obstacle_dist_m", optional_number(m.min_obstacle_dist_m)},
                {"avg_obstacle_dist_m", optional_number(m.avg_obstacle_dist_m)}};
}

PathMetrics metrics_from_json(const json& j) {
    ObjectReader r(j, "metrics");
    PathMetrics m;
    m.length_cells = r.number("length_cells");
    m.length_m = r.number("length_m");
    m.min_obstacle_dist_m = read_optional_number(r, "min_obstacle_dist_m");
    m.avg_obstacle_dist_m = read_optional_number(r, "avg_obstacle_dist_m");
    r.finish();
    return m;
}

json to_json(const PlanResult& p) {
    json path = json::array();
    for (Cell c : p.path) path.push_back(to_json(c));
    return json{{"path", std::move(path)},
                {"total_cost", p.total_cost},
                {"expansions", {{"anchor", p.expansions.anchor_count}, {"informed", p.expansions.informed_count}}},
                {"metrics", to_json(p.metrics)}};
}

PlanResult plan_from_json(const json& j) {
    ObjectReader r(j, "plan");
    PlanResult p;
    const auto& arr = detail::read_array(r.at("path"), "plan.path");
    for (std::size_t i = 0; i < arr.size(); ++i) p.path.push_back(cell_from_json(arr[i], "plan.path"));
    p.total_cost = r.number("total_cost");
    ObjectReader e(r.at("expansions"), "plan.expansions");
    p.expansions.anchor_count = static_cast<std::size_t>(e.integer("anchor"));
    p.expansions.informed_count = static_cast<std::size_t>(e.integer("informed"));
    e.finish();
    p.metrics = metrics_from_json(r.at("metrics"));
    r.finish();
    return p;
}

json to_json(const DangerReading& reading) {
    return json{{"obstacle_id", reading.obstacle_id}, {"score", reading.score}, {"prompt_id", reading.prompt_id}};
}

DangerReading reading_from_json(const json& j) {
    ObjectReader r(j, "reading");
    DangerReading d{r.string("obstacle_id"), r.number("score"), r.string_or("prompt_id", "")};
    r.finish();
    return d;
}

json to_json(const ObstacleBelief& belief) {
    json history = json::array();
    for (const auto& h : belief.history) {
        history.push_back({{"prompt_id", h.prompt_id}, {"alpha", h.alpha}, {"beta", h.beta}});
    }
    return json{{"alpha", belief.state.alpha}, {"beta", belief.state.beta}, {"history", std::move(history)}};
}

ObstacleBelief belief_from_json(const json& j) {
    ObjectReader r(j, "belief");
    ObstacleBelief b;
    b.state.alpha = r.number("alpha");
    b.state.beta = r.number("beta");
    const auto& arr = detail::read_array(r.at("history"), "belief.history");
    for (const auto& item : arr) {
        ObjectReader h(item, "belief.history");
        b.history.push_back({h.string("prompt_id"), h.number("alpha"), h.number("beta")});
        h.finish();
    }
    r.finish();
    if (!(b.state.alpha > 0.0) || !(b.state.beta > 0.0) || !std::isfinite(b.state.alpha) ||
        !std::isfinite(b.state.beta)) {
        throw ValidationError("belief", "alpha and beta must be finite and > 0");
    }
    return b;
}

}  // namespace semcost
