#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semcost/bayes_fusion.hpp"
#include "semcost/grid.hpp"
#include "semcost/llm_sensor.hpp"
#include "semcost/metrics.hpp"
#include "semcost/planner.hpp"
#include "semcost/potential_field.hpp"
#include "semcost/scenario.hpp"

namespace semcost {

/// One accepted prompt.
struct PromptRecord {
    std::string prompt_id;
    std::string text;
    std::vector<DangerReading> readings;
    double trust_n = 0.0;
    std::string timestamp;

    friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

/// Immutable geometry shared by every state derived from one scenario.
struct SessionGeometry {
    SemanticGrid grid;
    std::vector<ScalarField> distance_fields;  ///< per obstacle, cell-lengths
    ScalarField global_edf;
};

/// A complete planning session value. Operations return new states; the
/// geometry and cached distance fields are shared, never copied.
class SessionState {
public:
    struct UndoEntry {
        std::vector<ObstacleBelief> beliefs;
        std::size_t log_size = 0;
        std::optional<PlanResult> last_plan;

        friend bool operator==(const UndoEntry&, const UndoEntry&) = default;
    };

    /// Fresh session: rasterizes the scenario, caches the distance fields and
    /// puts every obstacle at the fusion prior.
    static SessionState create(Scenario scenario);

    const Scenario& scenario() const noexcept { return scenario_; }
    const SemanticGrid& grid() const noexcept { return geometry_->grid; }
    const std::vector<ScalarField>& distance_fields() const noexcept { return geometry_->distance_fields; }
    const ScalarField& global_edf() const noexcept { return geometry_->global_edf; }
    const std::vector<ObstacleBelief>& beliefs() const noexcept { return beliefs_; }
    const std::vector<double>& gains() const noexcept { return potential_.gains(); }
    const ScalarField& total_field() const noexcept { return potential_.total(); }
    const std::vector<PromptRecord>& prompt_log() const noexcept { return log_; }
    const std::optional<PlanResult>& last_plan() const noexcept { return last_plan_; }
    const std::vector<UndoEntry>& undo_stack() const noexcept { return undo_; }

    /// Fuses one prompt's readings (one per obstacle, any order) and rebuilds
    /// gains and the total field. Used by apply_prompt and replay.
    SessionState with_readings(PromptRecord record) const;
    SessionState with_plan(PlanResult plan) const;
    /// Throws StateError when there is nothing to undo.
    SessionState undone() const;

    /// Restores a saved state; fields are recomputed from the posteriors.
    static SessionState restore(Scenario scenario, std::vector<ObstacleBelief> beliefs, std::vector<PromptRecord> log,
                                std::optional<PlanResult> last_plan, std::vector<UndoEntry> undo);

    friend bool operator==(const SessionState& a, const SessionState& b);

private:
    SessionState() = default;
    void rebuild_field();

    std::shared_ptr<const SessionGeometry> geometry_;
    Scenario scenario_;
    std::vector<ObstacleBelief> beliefs_;
    PotentialStack potential_;
    std::vector<PromptRecord> log_;
    std::optional<PlanResult> last_plan_;
    std::vector<UndoEntry> undo_;
};

struct PromptOptions {
    std::optional<double> trust_n;         ///< defaults to the scenario's fusion trust_n
    std::optional<std::string> timestamp;  ///< defaults to the current UTC time
    int retries = kSensorRetries;
};

/// Sensor query covering every obstacle of the scenario.
SensorQuery sensor_query(const Scenario& scenario, std::string_view text);

/// prompt id for the `index`-th accepted prompt.
std::string make_prompt_id(std::string_view text, std::size_t index);

/// Queries the sensor once for all obstacles and fuses the readings. On any
/// sensor failure the SensorError propagates and `state` is untouched.
SessionState apply_prompt(const SessionState& state, std::string_view text, SensorBackend& backend,
                          const PromptOptions& options = {});

/// Plans on the current total field and stores the result with its metrics.
/// `params` overrides the scenario's planner parameters.
SessionState replan(const SessionState& state, const std::optional<PlannerParams>& params = std::nullopt);

SessionState undo(const SessionState& state);

/// Rebuilds a session by fusing every logged prompt's readings from scratch.
SessionState replay(const Scenario& scenario, const std::vector<PromptRecord>& log);

inline constexpr int kSessionFormatVersion = 1;

nlohmann::json to_json(const SessionState& state);
SessionState session_from_json(const nlohmann::json& j);
void save_state(const SessionState& state, const std::string& path);
/// Throws StateError for an unreadable, corrupt or wrong-version file.
SessionState load_state(const std::string& path);

/// Operator-facing dump: per-obstacle posteriors and gains, prompt log and
/// the last plan with its metrics.
nlohmann::json snapshot_json(const SessionState& state);

struct PromptVariant {
    std::string label;
    std::string text;
};

/// Independent fresh sessions per variant plus a gamma = 0 baseline column.
/// A failing variant is reported in its column and does not stop the others.
ComparisonTable compare_runs(const Scenario& scenario, const std::vector<PromptVariant>& variants,
                             SensorBackend& backend, const PromptOptions& options = {});

nlohmann::json to_json(const ComparisonTable& table);

/// Thread-safe holder of the latest complete SessionState: writers are
/// serialized, readers get an immutable snapshot at any time.
class Session {
public:
    explicit Session(SessionState initial);

    std::shared_ptr<const SessionState> snapshot() const;

    /// On sensor failure the state is kept and the error is logged, then
    /// rethrown.
    std::shared_ptr<const SessionState> apply_prompt(std::string_view text, SensorBackend& backend,
                                                     const PromptOptions& options = {});
    std::shared_ptr<const SessionState> replan(const std::optional<PlannerParams>& params = std::nullopt);
    std::shared_ptr<const SessionState> undo();

    std::vector<std::string> error_log() const;

private:
    void publish(SessionState next);

    mutable std::mutex write_mutex_;
    mutable std::mutex read_mutex_;
    std::shared_ptr<const SessionState> current_;
    std::vector<std::string> errors_;
};

}  // namespace semcost
