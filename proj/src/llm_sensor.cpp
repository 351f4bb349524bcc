#include "semcost/llm_sensor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "json_reader.hpp"
#include "semcost/hash.hpp"

namespace semcost {

using nlohmann::json;

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

const char* kInstructionsV1 =
    "You are a danger assessor for a mobile robot navigating a construction site.\n"
    "The operator gives an instruction in natural language. For every obstacle listed, "
    "estimate the probability in [0, 1] that passing close to it is dangerous given the "
    "instruction, where 0 means harmless and 1 means must be avoided.\n"
    "Reply with exactly one JSON object of the form {\"scores\": {\"<obstacle id>\": <number>}} "
    "covering every listed obstacle id. Do not add any other text.";

std::string format_score(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::Mock: return "mock";
        case BackendKind::Fixture: return "fixture";
        case BackendKind::Http: return "http";
    }
    return "unknown";
}

BackendKind backend_kind_from_string(std::string_view name) {
    if (name == "mock") return BackendKind::Mock;
    if (name == "fixture") return BackendKind::Fixture;
    if (name == "http") return BackendKind::Http;
    throw PreconditionError("unknown sensor backend \"" + std::string(name) + "\"");
}

void validate(const SensorQuery& query) {
    if (query.prompt.empty()) throw PreconditionError("sensor query prompt is empty");
    if (query.obstacles.empty()) throw PreconditionError("sensor query lists no obstacles");
}

std::string SensorRequest::text() const { return "[system]\n" + system + "\n[user]\n" + user + "\n"; }

std::string SensorRequest::hash() const { return stable_hash(text()); }

SensorRequest build_messages(const SensorQuery& query) {
    validate(query);
    if (query.instructions_version != "v1") {
        throw PreconditionError("unsupported instructions version \"" + query.instructions_version + "\"");
    }
    auto roster = query.obstacles;
    std::sort(roster.begin(), roster.end(), [](const ObstacleRef& a, const ObstacleRef& b) {
        return a.id != b.id ? a.id < b.id : a.family < b.family;
    });
    std::ostringstream user;
    user << "Instruction: " << query.prompt << "\n";
    user << "Obstacles:\n";
    for (const auto& o : roster) user << "- id: " << o.id << "; family: " << o.family << "\n";
    return SensorRequest{kInstructionsV1, user.str()};
}

std::string build_request(const SensorQuery& query) { return build_messages(query).text(); }

std::map<std::string, double> parse_scores(std::string_view raw, const std::vector<std::string>& expected_ids) {
    const auto open = raw.find('{');
    const auto close = raw.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw ScoreParseError("no JSON object in sensor output", std::string(raw));
    }
    json j;
    try {
        j = json::parse(raw.substr(open, close - open + 1));
    } catch (const json::parse_error& e) {
        throw ScoreParseError(std::string("unparseable sensor output: ") + e.what(), std::string(raw));
    }
    if (!j.is_object() || !j.contains("scores") || !j["scores"].is_object()) {
        throw ScoreParseError("sensor output lacks a \"scores\" object", std::string(raw));
    }
    const json& scores = j["scores"];
    std::map<std::string, double> out;
    for (const auto& id : expected_ids) {
        auto it = scores.find(id);
        if (it == scores.end()) {
            throw ScoreParseError("sensor output is missing a score for \"" + id + "\"", std::string(raw));
        }
        if (!it->is_number()) {
            throw ScoreParseError("non-numeric score for \"" + id + "\"", std::string(raw));
        }
        out[id] = it->get<double>();
    }
    return out;
}

SensorResponse score_obstacles(const SensorQuery& query, SensorBackend& backend, const std::string& prompt_id,
                               int retries) {
    const SensorRequest request = build_messages(query);
    std::vector<std::string> ids;
    ids.reserve(query.obstacles.size());
    for (const auto& o : query.obstacles) ids.push_back(o.id);

    std::vector<std::string> audit;
    std::string last_raw;
    const int attempts = 1 + std::max(0, retries);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        std::map<std::string, double> scores;
        try {
            last_raw = backend.complete(request, query);
            scores = parse_scores(last_raw, ids);
        } catch (const TransportError& e) {
            audit.push_back("attempt " + std::to_string(attempt) + ": transport failure: " + e.what());
            continue;
        } catch (const ScoreParseError& e) {
            audit.push_back("attempt " + std::to_string(attempt) + ": " + e.what());
            continue;
        }
        SensorResponse response;
        response.raw = last_raw;
        response.backend = backend.kind();
        response.attempts = attempt;
        response.audit = std::move(audit);
        for (const auto& id : ids) {
            double score = scores.at(id);
            const double clamped = std::clamp(score, 0.0, 1.0);
            if (clamped != score) {
                response.audit.push_back("score " + format_score(score) + " for \"" + id + "\" clamped to " +
                                         format_score(clamped));
                score = clamped;
            }
            response.readings.push_back(DangerReading{id, score, prompt_id});
        }
        return response;
    }
    throw SensorError("sensor failed after " + std::to_string(attempts) + " attempts: " +
                          (audit.empty() ? std::string("no attempt made") : audit.back()),
                      last_raw, audit);
}

// ---------------------------------------------------------------------------
// Mock backend

MockBackend::MockBackend(std::vector<Rule> rules, double fallback_score)
    : rules_(std::move(rules)), fallback_score_(fallback_score), rng_(0) {}

std::vector<MockBackend::Rule> MockBackend::construction_rules() {
    return {
        {"mep-ongoing", {{"undergoing", "ongoing", "in progress"}}, {{"workstation", 0.8}, {"wall", 0.6}}, 0.5},
        {"mep-completed",
         {{"completed", "finished"}, {"installation", "conduit"}},
         {{"workstation", 0.3}, {"wall", 0.1}},
         0.1},
        {"wet-cement",
         {{"cement", "concrete"}, {"poured", "wet", "fresh"}},
         {{"cement", 0.8}, {"weld", 0.2}, {"storage", 0.1}},
         0.1},
        {"work-completed",
         {{"completed", "dry", "dried", "cured"}},
         {{"cement", 0.1}, {"weld", 0.8}, {"storage", 0.1}},
         0.1},
        {"busy", {{"busy", "crowded"}}, {{"workstation", 1.0}, {"wall", 0.2}}, 0.5},
        {"empty", {{"empty", "quiet"}}, {}, 0.1},
    };
}

MockBackend MockBackend::from_json_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("mock rule table: ") + e.what());
    }
    detail::ObjectReader root(j, "");
    const double fallback = root.number_or("fallback", 0.5);
    std::vector<Rule> rules;
    const auto& arr = detail::read_array(root.at("rules"), "rules");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = detail::index_path("rules", i);
        detail::ObjectReader r(arr[i], path);
        Rule rule;
        rule.name = r.string_or("name", "rule" + std::to_string(i));
        const auto& groups = detail::read_array(r.at("keywords"), r.field("keywords"));
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::string gpath = detail::index_path(r.field("keywords"), g);
            std::vector<std::string> alternatives;
            if (groups[g].is_string()) {
                alternatives.push_back(lowercase(groups[g].get<std::string>()));
            } else {
                const auto& alts = detail::read_array(groups[g], gpath);
                for (std::size_t a = 0; a < alts.size(); ++a) {
                    alternatives.push_back(lowercase(detail::read_string(alts[a], detail::index_path(gpath, a))));
                }
            }
            rule.keywords.push_back(std::move(alternatives));
        }
        if (r.has("scores")) {
            const auto& scores = r.at("scores");
            if (!scores.is_object()) throw ValidationError(r.field("scores"), "expected an object");
            for (auto it = scores.begin(); it != scores.end(); ++it) {
                rule.scores.emplace_back(lowercase(it.key()),
                                         detail::read_number(it.value(), r.field("scores") + "." + it.key()));
            }
        }
        rule.default_score = r.number_or("default", 0.5);
        r.finish();
        rules.push_back(std::move(rule));
    }
    root.finish();
    return MockBackend(std::move(rules), fallback);
}

void MockBackend::set_noise(std::vector<Noise> noise, std::uint64_t seed) {
    for (auto& n : noise) {
        if (n.values.empty()) throw PreconditionError("noise rule \"" + n.pattern + "\" has no values");
        n.pattern = lowercase(n.pattern);
    }
    noise_ = std::move(noise);
    rng_.seed(seed);
}

std::vector<MockBackend::Noise> MockBackend::parse_noise_spec(std::string_view spec) {
    std::vector<Noise> out;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto end = std::min(spec.find(';', pos), spec.size());
        const std::string_view item = spec.substr(pos, end - pos);
        pos = end + 1;
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw PreconditionError("noise spec item \"" + std::string(item) + "\" must be pattern=v1/v2/...");
        }
        Noise n{std::string(item.substr(0, eq)), {}};
        std::string values(item.substr(eq + 1));
        std::replace(values.begin(), values.end(), '/', ' ');
        std::istringstream in(values);
        double v;
        while (in >> v) n.values.push_back(v);
        if (!in.eof() || n.values.empty()) {
            throw PreconditionError("noise spec item \"" + std::string(item) + "\" has malformed values");
        }
        out.push_back(std::move(n));
    }
    return out;
}

std::map<std::string, double> MockBackend::rule_scores(const SensorQuery& query) const {
    const std::string prompt = lowercase(query.prompt);
    const Rule* chosen = nullptr;
    for (const auto& rule : rules_) {
        const bool matches = std::all_of(rule.keywords.begin(), rule.keywords.end(), [&](const auto& group) {
            return std::any_of(group.begin(), group.end(),
                               [&](const std::string& kw) { return prompt.find(kw) != std::string::npos; });
        });
        if (matches) {
            chosen = &rule;
            break;
        }
    }
    std::map<std::string, double> out;
    for (const auto& o : query.obstacles) {
        double score = chosen ? chosen->default_score : fallback_score_;
        if (chosen) {
            const std::string family = lowercase(o.family);
            const std::string id = lowercase(o.id);
            for (const auto& [pattern, value] : chosen->scores) {
                if (family.find(pattern) != std::string::npos || id.find(pattern) != std::string::npos) {
                    score = value;
                    break;
                }
            }
        }
        out[o.id] = score;
    }
    return out;
}

std::string MockBackend::complete(const SensorRequest&, const SensorQuery& query) {
    auto scores = rule_scores(query);
    // Noise draws happen in roster order so a seed reproduces a run.
    for (const auto& o : query.obstacles) {
        const std::string family = lowercase(o.family);
        const std::string id = lowercase(o.id);
        for (const auto& n : noise_) {
            if (family.find(n.pattern) != std::string::npos || id.find(n.pattern) != std::string::npos) {
                std::uniform_int_distribution<std::size_t> pick(0, n.values.size() - 1);
                scores[o.id] = n.values[pick(rng_)];
                break;
            }
        }
    }
    json body = json::object();
    for (const auto& [id, score] : scores) body[id] = score;
    return json{{"scores", body}}.dump();
}

// ---------------------------------------------------------------------------
// Fixture backend

FixtureBackend::FixtureBackend(std::vector<Record> records) : records_(std::move(records)) {}

FixtureBackend FixtureBackend::from_json_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("fixture file: ") + e.what());
    }
    const auto& arr = detail::read_array(j, "<root>");
    std::vector<Record> records;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        detail::ObjectReader r(arr[i], detail::index_path("records", i));
        Record rec;
        rec.request_hash = r.string("request_hash");
        rec.raw_response = r.string("raw_response");
        rec.prompt = r.string_or("prompt", "");
        r.finish();
        records.push_back(std::move(rec));
    }
    return FixtureBackend(std::move(records));
}

FixtureBackend FixtureBackend::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open fixture file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string FixtureBackend::to_json_text(const std::vector<Record>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        json j = {{"request_hash", r.request_hash}, {"raw_response", r.raw_response}};
        if (!r.prompt.empty()) j["prompt"] = r.prompt;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string FixtureBackend::complete(const SensorRequest& request, const SensorQuery&) {
    const std::string key = request.hash();
    for (const auto& r : records_) {
        if (r.request_hash == key) return r.raw_response;
    }
    throw TransportError("no fixture record for request " + key);
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / double(n);
        m2 += delta * (x - mean);
    }
    double sample_stddev() const { return n > 1 ? std::sqrt(m2 / double(n - 1)) : 0.0; }
};

std::vector<double> fused_means(const SensorQuery& query, SensorBackend& backend, const FusionParams& fusion,
                                double trust_n) {
    const SensorResponse resp = score_obstacles(query, backend);
    std::vector<double> means;
    means.reserve(resp.readings.size());
    for (const auto& r : resp.readings) means.push_back(posterior_mean(update(reset(fusion), r.score, trust_n)));
    return means;
}

std::vector<PosteriorStat> collect(const SensorQuery& query, const std::vector<RunningStats>& stats) {
    std::vector<PosteriorStat> out;
    for (std::size_t k = 0; k < query.obstacles.size(); ++k) {
        out.push_back({query.obstacles[k].id, stats[k].mean, stats[k].sample_stddev()});
    }
    return out;
}

}  // namespace

std::vector<PosteriorStat> ablation_run(const SensorQuery& query, SensorBackend& backend, int runs,
                                        const FusionParams& fusion) {
    if (runs < 2) throw PreconditionError("ablation needs at least 2 runs");
    validate(fusion);
    validate(query);
    std::vector<RunningStats> stats(query.obstacles.size());
    for (int run = 0; run < runs; ++run) {
        const auto means = fused_means(query, backend, fusion, fusion.trust_n);
        for (std::size_t k = 0; k < means.size(); ++k) stats[k].add(means[k]);
    }
    return collect(query, stats);
}

std::vector<SweepPoint> trust_sweep(const SensorQuery& query, SensorBackend& backend,
                                    const std::vector<double>& n_values, const FusionParams& fusion,
                                    int queries_per_n) {
    if (n_values.empty()) throw PreconditionError("trust sweep needs at least one N value");
    if (queries_per_n < 1) throw PreconditionError("trust sweep needs at least one query per N");
    for (double n : n_values) {
        if (!std::isfinite(n) || n < 0.0) throw PreconditionError("trust sweep N values must be >= 0");
    }
    validate(query);
    (void)reset(fusion);
    std::vector<SweepPoint> curve;
    for (double n : n_values) {
        std::vector<RunningStats> stats(query.obstacles.size());
        for (int q = 0; q < queries_per_n; ++q) {
            const auto means = fused_means(query, backend, fusion, n);
            for (std::size_t k = 0; k < means.size(); ++k) stats[k].add(means[k]);
        }
        curve.push_back({n, collect(query, stats)});
    }
    return curve;
}

}  // namespace semcost
