#pragma once

#include "kgce/action.hpp"
#include "kgce/action_parser.hpp"
#include "kgce/chat_client.hpp"
#include "kgce/prompt.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kgce {

/// Model reply that did not contain a parseable action.
struct AgentFailure {
    std::string raw_reply;
    ParseFailure failure;
};

/// Outcome of one agent turn. Exactly one of the alternatives applies:
/// an action to execute, a parse failure (consumes a step), or an
/// exhausted script (treated as done()).
struct AgentTurn {
    std::optional<Action> action;
    std::optional<AgentFailure> failure;
    bool script_exhausted = false;
    /// Raw model reply; empty for scripted agents.
    std::string raw_reply;
};

class Agent {
public:
    virtual ~Agent() = default;
    /// May throw TransportError.
    virtual AgentTurn next(const AgentTurnInput& input) = 0;
};

/// Throws ScriptExhausted when `turn_index` is past the end.
const Action& scripted_next(const std::vector<Action>& script, std::size_t turn_index);

class ScriptedAgent : public Agent {
public:
    explicit ScriptedAgent(std::vector<Action> script) : script_(std::move(script)) {}

    AgentTurn next(const AgentTurnInput& input) override;

private:
    std::vector<Action> script_;
    std::size_t turn_ = 0;
};

/// One action per line in the grammar; blank lines and `#` comments ignored.
/// Throws ParseError naming the line.
std::vector<Action> parse_script(std::string_view text);
std::vector<Action> load_script(const std::filesystem::path& file);

/// Sends the system preamble plus one user message built from `input` and
/// returns the raw reply. Transport errors are retried per `config`.
std::string request_model_reply(ChatClient& client, const ModelEndpointConfig& config, const AgentTurnInput& input,
                                const Sleeper& sleep);

/// request_model_reply followed by parse_action. Throws TransportError once
/// retries are exhausted.
std::variant<ParsedAction, AgentFailure> model_next(ChatClient& client, const ModelEndpointConfig& config,
                                                    const AgentTurnInput& input, const Sleeper& sleep);

class ModelAgent : public Agent {
public:
    ModelAgent(ChatClient& client, ModelEndpointConfig config, Sleeper sleep)
        : client_(client), config_(std::move(config)), sleep_(std::move(sleep)) {}

    AgentTurn next(const AgentTurnInput& input) override;

private:
    ChatClient& client_;
    ModelEndpointConfig config_;
    Sleeper sleep_;
};

} // namespace kgce
