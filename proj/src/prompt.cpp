#include "kgce/prompt.hpp"

#include <sstream>

namespace kgce {

std::string summarize_flags(const StepFlags& flags) {
    std::vector<std::string> parts;
    if (flags.out_of_range) parts.emplace_back("out_of_range");
    if (flags.invalid_target) parts.emplace_back("invalid_target");
    if (flags.effect_applied) parts.emplace_back("effect");
    if (flags.revisit) parts.emplace_back("revisit");
    if (parts.empty()) return "no_effect";
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ", ";
        out += parts[i];
    }
    return out;
}

const std::string& system_preamble() {
    static const std::string text =
        "You operate simulated desktop and mobile devices to complete a task.\n"
        "Each turn you see the current screen and reply with exactly one action.\n"
        "Actions:\n"
        "  tap(ELEMENT_ID)            tap an element listed on the current screen\n"
        "  tap_xy(X, Y)               tap screen coordinates (integers)\n"
        "  type(\"TEXT\")               type into the focused or first text field\n"
        "  open_app(\"APP NAME\")       launch an installed app on the active device\n"
        "  switch_device(\"DEVICE_ID\") make another device active\n"
        "  back()                     return to the previous page\n"
        "  done()                     declare the task finished\n"
        "Strings are double-quoted; escape \" as \\\" and \\ as \\\\.\n";
    return text;
}

std::string build_user_message(const AgentTurnInput& input) {
    std::ostringstream os;
    if (!input.kb_fragment.empty()) {
        os << kKnowledgeHeading << "\n" << input.kb_fragment;
        if (input.kb_fragment.back() != '\n') os << "\n";
        os << "\n";
    }
    os << "## Task\n" << input.instruction << "\n\n";
    os << "## Current Screen\n" << render_observation(input.observation) << "\n";
    os << "## History\n";
    if (input.history.empty()) os << "(none)\n";
    for (std::size_t i = 0; i < input.history.size(); ++i) {
        os << (i + 1) << ". " << input.history[i].action_text << " -> " << input.history[i].result_summary << "\n";
    }
    os << "\nRemaining steps: " << input.remaining_steps << "\n";
    os << "Reply with exactly one action.\n";
    return os.str();
}

std::string build_prompt(const AgentTurnInput& input) {
    return system_preamble() + "\n" + build_user_message(input);
}

} // namespace kgce
