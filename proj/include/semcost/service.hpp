#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semcost/llm_sensor.hpp"
#include "semcost/scenario.hpp"
#include "semcost/session.hpp"

namespace httplib {
class Server;
}

namespace semcost {

struct ServiceConfig {
    std::string state_dir;  ///< empty: sessions live in memory only
    std::string token;      ///< empty: no authentication
};

/// HTTP front end over a set of sessions.
///
///   POST /sessions                      {"scenario": {...}} -> {"session_id"}
///   GET  /sessions/{id}                 snapshot
///   POST /sessions/{id}/prompt          {"text", "backend", "trust_n"?} -> snapshot
///   POST /sessions/{id}/plan            {"planner"?: {...}} -> plan result
///   POST /sessions/{id}/undo            snapshot
///   GET  /sessions/{id}/field?kind=edf|potential|combined
///   GET  /sessions/{id}/path
///
/// Errors are {"code", "message", "detail"}.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();

    /// Backends are shared by all sessions; calls into one backend are
    /// serialized.
    void set_backend(BackendKind kind, std::unique_ptr<SensorBackend> backend);

    /// Loads every saved session from the state directory. Files that fail to
    /// load are skipped and reported in the returned list.
    std::vector<std::string> restore_sessions();

    std::string create_session(Scenario scenario);
    std::shared_ptr<Session> find(const std::string& id) const;
    std::vector<std::string> session_ids() const;

    void register_routes(httplib::Server& server);

private:
    struct BackendSlot;

    void persist(const std::string& id, const SessionState& state) const;
    BackendSlot& backend(BackendKind kind);

    ServiceConfig config_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<BackendKind, std::unique_ptr<BackendSlot>> backends_;
};

}  // namespace semcost
