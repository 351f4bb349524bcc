#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "semcost/llm_sensor.hpp"

namespace semcost {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.api_key.empty()) config_.api_key = env_or("SEMCOST_LLM_KEY", "");
    if (config_.model.empty()) config_.model = env_or("SEMCOST_LLM_MODEL", "");
    while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
}

std::string HttpBackend::request_body(const SensorRequest& request) const {
    json body = {
        {"model", config_.model},
        {"messages",
         json::array({{{"role", "system"}, {"content", request.system}},
                      {{"role", "user"}, {"content", request.user}}})},
        {"temperature", config_.temperature},
        {"top_p", config_.top_p},
        {"frequency_penalty", config_.frequency_penalty},
        {"presence_penalty", config_.presence_penalty},
    };
    return body.dump();
}

std::string HttpBackend::complete(const SensorRequest& request, const SensorQuery&) {
    if (config_.model.empty()) {
        throw TransportError("no model configured (set SEMCOST_LLM_MODEL or pass a model name)");
    }
    httplib::Client client(config_.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post("/v1/chat/completions", headers, request_body(request), "application/json");
    if (!res) {
        throw TransportError("chat completion request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError("chat completion returned HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200));
    }
    json reply;
    try {
        reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ScoreParseError(std::string("malformed chat completion envelope: ") + e.what(), res->body);
    }
}

}  // namespace semcost
