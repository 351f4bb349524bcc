#pragma once

// Strict reader for JSON objects: every key must be consumed, types are
// checked, and failures name the dotted field path.

#include <set>
#include <string>

#include <json.hpp>

#include "semcost/error.hpp"

namespace semcost::detail {

inline std::string join_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

inline std::string index_path(const std::string& parent, std::size_t i) {
    return parent + "[" + std::to_string(i) + "]";
}

inline double read_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path, "expected a number");
    return j.get<double>();
}

inline int read_int(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ValidationError(path, "expected an integer");
    return j.get<int>();
}

inline std::string read_string(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) throw ValidationError(path, "expected a string");
    return j.get<std::string>();
}

inline const nlohmann::json& read_array(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw ValidationError(path, "expected an array");
    return j;
}

class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const nlohmann::json& at(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) throw ValidationError(field(key), "missing required field");
        return *it;
    }

    std::string field(const std::string& key) const { return join_path(path_, key); }

    double number(const std::string& key) { return read_number(at(key), field(key)); }
    double number_or(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }
    int integer(const std::string& key) { return read_int(at(key), field(key)); }
    int integer_or(const std::string& key, int fallback) {
        return has(key) ? integer(key) : fallback;
    }
    std::string string(const std::string& key) { return read_string(at(key), field(key)); }
    std::string string_or(const std::string& key, std::string fallback) {
        return has(key) ? string(key) : std::move(fallback);
    }

    /// Rejects keys that were never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.contains(it.key())) {
                throw ValidationError(field(it.key()), "unknown key");
            }
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace semcost::detail
