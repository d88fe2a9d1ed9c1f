#pragma once

#include "kgce/chat_client.hpp"
#include "kgce/json_util.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kMockPlanSchema = "kgce-mock/1";

/// One step of a mock model's plan. `tap` intents name the target by a
/// phrase from its functional description rather than by element id.
struct Intent {
    enum class Kind { tap, type, open_app, switch_device, back, done, reply };

    Kind kind = Kind::done;
    /// Description phrase, text, app name, device id, or verbatim reply.
    std::string argument;
};

/// Deterministic stand-in for a chat model. For each task instruction it
/// follows a fixed plan of intents; the turn index is the number of history
/// entries in the prompt, so the client is stateless and thread-safe.
///
/// A `tap` intent resolves against knowledge-base element descriptions
/// first, then on-screen descriptions. When neither mentions the phrase it
/// guesses the first tappable element on screen, which is how an agent
/// without domain knowledge behaves on opaque private-app screens.
class IntentMockClient : public ChatClient {
public:
    explicit IntentMockClient(std::map<std::string, std::vector<Intent>> plans_by_instruction);

    std::string complete(const ChatRequest& request) override;

    /// Pure policy used by complete(): maps a user message to a reply.
    std::string reply_for(std::string_view user_message) const;

private:
    std::map<std::string, std::vector<Intent>> plans_;
};

std::map<std::string, std::vector<Intent>> mock_plans_from_json(const nlohmann::json& doc);
std::map<std::string, std::vector<Intent>> load_mock_plans(const std::filesystem::path& file);

} // namespace kgce
