#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace kgce {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
};

/// Chat-completions transport. Implementations throw TransportError and
/// must allow concurrent calls.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

struct ModelEndpointConfig {
    std::string base_url;
    std::string model;
    std::string api_key_env = "KGCE_MODEL_API_KEY";
    double timeout_seconds = 60.0;
    int max_retries = 3;
    double temperature = 0.0;
    std::chrono::milliseconds initial_backoff{500};

    /// Throws ConfigError.
    void validate() const;
};

/// POSTs `{base_url}/chat/completions` and returns
/// `choices[0].message.content`. http and https URLs are supported.
class HttpChatClient : public ChatClient {
public:
    HttpChatClient(std::string base_url, std::string api_key, double timeout_seconds);

    std::string complete(const ChatRequest& request) override;

    /// Request body in the chat-completions convention.
    static std::string encode_request(const ChatRequest& request);
    /// Extracts the assistant text; throws TransportError on malformed bodies.
    static std::string decode_response(const std::string& body);

private:
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::string api_key_;
    double timeout_seconds_;
};

/// Returns canned replies in order, then "done()". Records every request.
class ScriptedReplyClient : public ChatClient {
public:
    explicit ScriptedReplyClient(std::vector<std::string> replies);

    std::string complete(const ChatRequest& request) override;
    std::vector<ChatRequest> requests() const;

private:
    mutable std::mutex mutex_;
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    std::vector<ChatRequest> requests_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// Calls `client.complete`, retrying TransportError up to
/// `config.max_retries` times with exponential backoff.
std::string complete_with_retry(ChatClient& client, const ModelEndpointConfig& config, const ChatRequest& request,
                                const Sleeper& sleep);

} // namespace kgce
