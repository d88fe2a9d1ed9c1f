#include "kgce/mock_model.hpp"

#include "kgce/action.hpp"
#include "kgce/error.hpp"
#include "kgce/knowledge_base.hpp"
#include "kgce/prompt.hpp"

#include <cctype>

namespace kgce {

using json_util::child;
using json_util::index;
using nlohmann::json;

namespace {

struct PromptView {
    std::string task;
    int turn = 0;
    // (id, description) pairs
    std::vector<std::pair<std::string, std::string>> screen;
    std::vector<std::string> tappable;
    std::vector<std::pair<std::string, std::string>> knowledge;
};

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::string_view trim_left(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

PromptView read_prompt(std::string_view message) {
    PromptView view;
    std::string section;
    for (auto line : split_lines(message)) {
        if (line.substr(0, 3) == "## ") {
            section = std::string(line.substr(3));
            continue;
        }
        if (section == "Task") {
            if (!line.empty()) {
                if (!view.task.empty()) view.task += "\n";
                view.task += line;
            }
        } else if (section == "Current Screen") {
            // "- id [kind] @ (x,y,w,h): description"
            if (line.substr(0, 2) != "- ") continue;
            auto rest = line.substr(2);
            auto sp = rest.find(" [");
            auto colon = rest.find("): ");
            if (sp == std::string_view::npos || colon == std::string_view::npos) continue;
            std::string id(rest.substr(0, sp));
            auto kind_end = rest.find(']', sp);
            auto kind = rest.substr(sp + 2, kind_end - sp - 2);
            view.screen.emplace_back(id, std::string(rest.substr(colon + 3)));
            if (kind == "button" || kind == "list_item") view.tappable.push_back(id);
        } else if (section == "History") {
            if (!line.empty() && std::isdigit(static_cast<unsigned char>(line.front()))) ++view.turn;
        } else if (section == kKnowledgeHeading.substr(3)) {
            // "    - id @ (x,y,w,h): description"
            auto t = trim_left(line);
            if (t.substr(0, 2) != "- ") continue;
            auto rest = t.substr(2);
            auto at = rest.find(" @ (");
            auto colon = rest.find("): ", at == std::string_view::npos ? 0 : at);
            if (at == std::string_view::npos || colon == std::string_view::npos) continue;
            view.knowledge.emplace_back(std::string(rest.substr(0, at)), std::string(rest.substr(colon + 3)));
        }
    }
    return view;
}

bool mentions(std::string_view haystack, std::string_view phrase) {
    return normalize_for_match(haystack).find(normalize_for_match(phrase)) != std::string::npos;
}

std::string resolve_tap(const PromptView& view, const std::string& phrase) {
    auto on_screen = [&](const std::string& id) {
        for (const auto& [sid, _] : view.screen) {
            if (sid == id) return true;
        }
        return false;
    };
    for (const auto& [id, desc] : view.knowledge) {
        if (on_screen(id) && mentions(desc, phrase)) return "tap(" + id + ")";
    }
    for (const auto& [id, desc] : view.screen) {
        if (mentions(desc, phrase)) return "tap(" + id + ")";
    }
    if (!view.tappable.empty()) return "tap(" + view.tappable.front() + ")";
    return "back()";
}

} // namespace

IntentMockClient::IntentMockClient(std::map<std::string, std::vector<Intent>> plans_by_instruction)
    : plans_(std::move(plans_by_instruction)) {}

std::string IntentMockClient::complete(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == "user") return reply_for(it->content);
    }
    return "I received no task.";
}

std::string IntentMockClient::reply_for(std::string_view user_message) const {
    PromptView view = read_prompt(user_message);
    auto plan = plans_.find(view.task);
    if (plan == plans_.end()) return "I am not sure how to do this task.";
    if (view.turn >= static_cast<int>(plan->second.size())) return "done()";

    const Intent& intent = plan->second[static_cast<std::size_t>(view.turn)];
    switch (intent.kind) {
    case Intent::Kind::tap: return "I will tap it: " + resolve_tap(view, intent.argument);
    case Intent::Kind::type: return render_action(TypeText{intent.argument});
    case Intent::Kind::open_app: return render_action(OpenApp{intent.argument});
    case Intent::Kind::switch_device: return render_action(SwitchDevice{intent.argument});
    case Intent::Kind::back: return "back()";
    case Intent::Kind::done: return "The task is complete. done()";
    case Intent::Kind::reply: return intent.argument;
    }
    return "done()";
}

std::map<std::string, std::vector<Intent>> mock_plans_from_json(const json& doc) {
    json_util::expect_schema(doc, kMockPlanSchema);
    std::map<std::string, std::vector<Intent>> out;
    const json& plans = json_util::require_array(doc, "plans", "$");
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto p_path = index("$.plans", i);
        auto instruction = json_util::require_string(plans[i], "instruction", p_path);
        std::vector<Intent> steps;
        const json& steps_doc = json_util::require_array(plans[i], "steps", p_path);
        for (std::size_t s = 0; s < steps_doc.size(); ++s) {
            const auto s_path = index(child(p_path, "steps"), s);
            auto kind = json_util::require_string(steps_doc[s], "intent", s_path);
            Intent intent;
            if (kind == "tap") intent = {Intent::Kind::tap, json_util::require_string(steps_doc[s], "describe", s_path)};
            else if (kind == "type") intent = {Intent::Kind::type, json_util::require_string(steps_doc[s], "text", s_path)};
            else if (kind == "open_app") intent = {Intent::Kind::open_app, json_util::require_string(steps_doc[s], "app", s_path)};
            else if (kind == "switch_device") intent = {Intent::Kind::switch_device, json_util::require_string(steps_doc[s], "device", s_path)};
            else if (kind == "back") intent = {Intent::Kind::back, {}};
            else if (kind == "done") intent = {Intent::Kind::done, {}};
            else if (kind == "reply") intent = {Intent::Kind::reply, json_util::require_string(steps_doc[s], "text", s_path)};
            else throw SchemaViolation(child(s_path, "intent"), "unknown intent '" + kind + "'");
            steps.push_back(std::move(intent));
        }
        if (!out.emplace(instruction, std::move(steps)).second) {
            throw SchemaViolation(child(p_path, "instruction"), "duplicate plan for instruction");
        }
    }
    return out;
}

std::map<std::string, std::vector<Intent>> load_mock_plans(const std::filesystem::path& file) {
    return mock_plans_from_json(json_util::read_file(file));
}

} // namespace kgce
