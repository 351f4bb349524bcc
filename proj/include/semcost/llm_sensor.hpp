#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "semcost/bayes_fusion.hpp"
#include "semcost/error.hpp"

namespace semcost {

enum class BackendKind { Mock, Fixture, Http };

std::string to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view name);

struct ObstacleRef {
    std::string id;
    std::string family;

    friend bool operator==(const ObstacleRef&, const ObstacleRef&) = default;
};

struct SensorQuery {
    std::string prompt;
    std::vector<ObstacleRef> obstacles;
    std::string instructions_version = "v1";
};

/// Throws PreconditionError for an empty prompt or roster.
void validate(const SensorQuery& query);

/// Rendered chat request. `text()` is the canonical single-string form used
/// for fixture keys.
struct SensorRequest {
    std::string system;
    std::string user;

    std::string text() const;
    std::string hash() const;
};

/// Deterministic rendering of a query; the roster is sorted by id first.
SensorRequest build_messages(const SensorQuery& query);
std::string build_request(const SensorQuery& query);

struct SensorResponse {
    std::vector<DangerReading> readings;  ///< one per queried obstacle, in query order
    std::string raw;                      ///< verbatim output of the accepted attempt
    BackendKind backend = BackendKind::Mock;
    std::vector<std::string> audit;  ///< clamped scores, retried failures
    int attempts = 1;

    friend bool operator==(const SensorResponse&, const SensorResponse&) = default;
};

/// The backend could not produce any output (unreachable, timeout, missing
/// fixture record).
class TransportError : public Error {
public:
    using Error::Error;
};

/// Backend output that could not be turned into a complete score map.
class ScoreParseError : public ParseError {
public:
    ScoreParseError(const std::string& message, std::string raw)
        : ParseError(message), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// The sensor gave up after all retries. Carries the last raw output seen.
class SensorError : public Error {
public:
    SensorError(const std::string& message, std::string raw, std::vector<std::string> audit)
        : Error(message), raw_(std::move(raw)), audit_(std::move(audit)) {}
    const std::string& raw() const noexcept { return raw_; }
    const std::vector<std::string>& audit() const noexcept { return audit_; }

private:
    std::string raw_;
    std::vector<std::string> audit_;
};

class SensorBackend {
public:
    virtual ~SensorBackend() = default;
    virtual BackendKind kind() const noexcept = 0;
    /// Raw model output for one request. Throws TransportError when no output
    /// is available.
    virtual std::string complete(const SensorRequest& request, const SensorQuery& query) = 0;
};

/// Keyword rule table standing in for a language model.
///
/// The first rule whose every keyword group matches the lowercased prompt
/// wins (a group matches when any of its alternatives is a substring). Each
/// obstacle then takes the score of the first pattern contained in its
/// lowercased family or id, else the rule's default. Noise rules replace a
/// matched obstacle's score with a uniform draw from a value list.
class MockBackend : public SensorBackend {
public:
    struct Rule {
        std::string name;
        std::vector<std::vector<std::string>> keywords;
        std::vector<std::pair<std::string, double>> scores;
        double default_score = 0.5;
    };
    struct Noise {
        std::string pattern;
        std::vector<double> values;
    };

    explicit MockBackend(std::vector<Rule> rules, double fallback_score = 0.5);

    /// Construction-site vocabulary: busy, empty, ongoing and completed MEP
    /// work, wet and dried cement.
    static std::vector<Rule> construction_rules();
    /// Loads {"rules": [{"name", "keywords": [[..]], "scores": {..}, "default"}], "fallback"}.
    static MockBackend from_json_text(std::string_view text);

    void set_noise(std::vector<Noise> noise, std::uint64_t seed);
    /// Parses "pattern=v1/v2/v3;pattern2=..." into noise rules.
    static std::vector<Noise> parse_noise_spec(std::string_view spec);

    BackendKind kind() const noexcept override { return BackendKind::Mock; }
    std::string complete(const SensorRequest& request, const SensorQuery& query) override;

    /// Scores the rule table assigns, before noise.
    std::map<std::string, double> rule_scores(const SensorQuery& query) const;

private:
    std::vector<Rule> rules_;
    double fallback_score_;
    std::vector<Noise> noise_;
    std::mt19937_64 rng_;
};

/// Replays recorded raw responses keyed by request hash. File format: a JSON
/// array of {"request_hash", "raw_response"} records (an optional "prompt"
/// field is ignored). The first record with a matching hash wins.
class FixtureBackend : public SensorBackend {
public:
    struct Record {
        std::string request_hash;
        std::string raw_response;
        std::string prompt;
    };

    explicit FixtureBackend(std::vector<Record> records);
    static FixtureBackend from_json_text(std::string_view text);
    static FixtureBackend from_file(const std::string& path);
    static std::string to_json_text(const std::vector<Record>& records);

    BackendKind kind() const noexcept override { return BackendKind::Fixture; }
    std::string complete(const SensorRequest& request, const SensorQuery& query) override;

    const std::vector<Record>& records() const noexcept { return records_; }

private:
    std::vector<Record> records_;
};

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com";
    std::string model;    ///< empty: read SEMCOST_LLM_MODEL at construction
    std::string api_key;  ///< empty: read SEMCOST_LLM_KEY at construction
    double temperature = 1.0;
    double top_p = 1.0;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    std::chrono::milliseconds timeout{30000};
};

/// OpenAI-style chat completion client: POST {base_url}/v1/chat/completions.
class HttpBackend : public SensorBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    BackendKind kind() const noexcept override { return BackendKind::Http; }
    std::string complete(const SensorRequest& request, const SensorQuery& query) override;

    /// JSON body sent for a request.
    std::string request_body(const SensorRequest& request) const;
    const HttpBackendConfig& config() const noexcept { return config_; }

private:
    HttpBackendConfig config_;
};

/// Extracts {"scores": {id: number}} from raw output, tolerating prose
/// around the outermost braces. Throws ScoreParseError when the object is
/// unparseable, lacks an expected id, or holds a non-numeric score.
std::map<std::string, double> parse_scores(std::string_view raw, const std::vector<std::string>& expected_ids);

inline constexpr int kSensorRetries = 3;

/// Queries the backend once (plus up to `retries` retries on transport or
/// parse failure) and returns one reading per obstacle. Out-of-range scores
/// are clamped into [0, 1] and noted in `audit`. Throws SensorError when
/// every attempt fails.
SensorResponse score_obstacles(const SensorQuery& query, SensorBackend& backend, const std::string& prompt_id = "",
                               int retries = kSensorRetries);

struct PosteriorStat {
    std::string obstacle_id;
    double mean = 0.0;
    double stddev = 0.0;  ///< sample standard deviation
};

/// `runs` independent sensor calls, each fused into a fresh prior; returns
/// the sample mean and standard deviation of the resulting posterior means
/// per obstacle. Throws PreconditionError for runs < 2; backend errors
/// propagate and discard the partial results.
std::vector<PosteriorStat> ablation_run(const SensorQuery& query, SensorBackend& backend, int runs,
                                        const FusionParams& fusion);

struct SweepPoint {
    double trust_n = 0.0;
    std::vector<PosteriorStat> posteriors;  ///< stddev is 0 with one query per point
};

/// For every N: `queries_per_n` sensor calls, each fused once into a fresh
/// prior with trust N.
std::vector<SweepPoint> trust_sweep(const SensorQuery& query, SensorBackend& backend,
                                    const std::vector<double>& n_values, const FusionParams& fusion,
                                    int queries_per_n = 1);

}  // namespace semcost
