#include "kgce/agent.hpp"

#include "kgce/error.hpp"

#include <fstream>
#include <sstream>

namespace kgce {

const Action& scripted_next(const std::vector<Action>& script, std::size_t turn_index) {
    if (turn_index >= script.size()) {
        throw ScriptExhausted("script has " + std::to_string(script.size()) + " actions, turn " +
                              std::to_string(turn_index) + " requested");
    }
    return script[turn_index];
}

AgentTurn ScriptedAgent::next(const AgentTurnInput&) {
    AgentTurn turn;
    try {
        turn.action = scripted_next(script_, turn_);
        ++turn_;
    } catch (const ScriptExhausted&) {
        turn.script_exhausted = true;
    }
    return turn;
}

std::vector<Action> parse_script(std::string_view text) {
    std::vector<Action> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') continue;
        auto outcome = parse_action(line);
        if (auto* failure = std::get_if<ParseFailure>(&outcome)) {
            throw ParseError("script line " + std::to_string(line_no) + ": " + failure->describe());
        }
        out.push_back(std::get<ParsedAction>(outcome).action);
    }
    return out;
}

std::vector<Action> load_script(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseError("cannot open script " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_script(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(file.string() + ": " + e.what());
    }
}

std::string request_model_reply(ChatClient& client, const ModelEndpointConfig& config, const AgentTurnInput& input,
                                const Sleeper& sleep) {
    ChatRequest request;
    request.model = config.model;
    request.temperature = config.temperature;
    request.messages = {{"system", system_preamble()}, {"user", build_user_message(input)}};
    return complete_with_retry(client, config, request, sleep);
}

std::variant<ParsedAction, AgentFailure> model_next(ChatClient& client, const ModelEndpointConfig& config,
                                                    const AgentTurnInput& input, const Sleeper& sleep) {
    std::string reply = request_model_reply(client, config, input, sleep);
    auto outcome = parse_action(reply);
    if (auto* parsed = std::get_if<ParsedAction>(&outcome)) return *parsed;
    return AgentFailure{std::move(reply), std::get<ParseFailure>(outcome)};
}

AgentTurn ModelAgent::next(const AgentTurnInput& input) {
    AgentTurn turn;
    turn.raw_reply = request_model_reply(client_, config_, input, sleep_);
    auto outcome = parse_action(turn.raw_reply);
    if (auto* parsed = std::get_if<ParsedAction>(&outcome)) {
        turn.action = parsed->action;
    } else {
        turn.failure = AgentFailure{turn.raw_reply, std::get<ParseFailure>(outcome)};
    }
    return turn;
}

} // namespace kgce
