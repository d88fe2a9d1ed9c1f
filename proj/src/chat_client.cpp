#include "httplib.h"

#include "kgce/chat_client.hpp"

#include "kgce/error.hpp"
#include "kgce/json_util.hpp"

#include <cmath>
#include <thread>

namespace kgce {

using nlohmann::json;

void ModelEndpointConfig::validate() const {
    if (base_url.empty()) throw ConfigError("model endpoint: base URL is empty");
    if (model.empty()) throw ConfigError("model endpoint: model identifier is empty");
    if (!(timeout_seconds > 0)) throw ConfigError("model endpoint: timeout must be > 0");
    if (max_retries < 0) throw ConfigError("model endpoint: max retries must be >= 0");
}

HttpChatClient::HttpChatClient(std::string base_url, std::string api_key, double timeout_seconds)
    : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
    while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
    auto scheme = base_url.find("://");
    if (scheme == std::string::npos) throw ConfigError("model endpoint: base URL needs a scheme: " + base_url);
    auto slash = base_url.find('/', scheme + 3);
    scheme_host_port_ = base_url.substr(0, slash);
    path_prefix_ = slash == std::string::npos ? "" : base_url.substr(slash);
}

std::string HttpChatClient::encode_request(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"model", request.model}, {"messages", messages}, {"temperature", request.temperature}}.dump();
}

std::string HttpChatClient::decode_response(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw TransportError(std::string("malformed response body: ") + e.what());
    }
    try {
        const json& content = doc.at("choices").at(0).at("message").at("content");
        if (content.is_null()) return {};
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected response shape: ") + e.what());
    }
}

std::string HttpChatClient::complete(const ChatRequest& request) {
    // One client per call keeps concurrent episodes independent.
    httplib::Client cli(scheme_host_port_);
    auto seconds = static_cast<time_t>(timeout_seconds_);
    auto micros = static_cast<time_t>((timeout_seconds_ - static_cast<double>(seconds)) * 1e6);
    cli.set_connection_timeout(seconds, micros);
    cli.set_read_timeout(seconds, micros);
    cli.set_write_timeout(seconds, micros);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(path_prefix_ + "/chat/completions", headers, encode_request(request), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    return decode_response(res->body);
}

ScriptedReplyClient::ScriptedReplyClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}

std::string ScriptedReplyClient::complete(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    if (next_ >= replies_.size()) return "done()";
    return replies_[next_++];
}

std::vector<ChatRequest> ScriptedReplyClient::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string complete_with_retry(ChatClient& client, const ModelEndpointConfig& config, const ChatRequest& request,
                                const Sleeper& sleep) {
    auto delay = config.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return client.complete(request);
        } catch (const TransportError& e) {
            if (attempt >= config.max_retries) {
                throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt + 1) + " attempts)");
            }
        }
        if (sleep) sleep(delay);
        delay *= 2;
    }
}

} // namespace kgce
