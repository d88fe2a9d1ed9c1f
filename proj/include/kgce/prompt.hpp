#pragma once

#include "kgce/env_sim.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kKnowledgeHeading = "## Knowledge Base";

struct HistoryEntry {
    std::string action_text;
    std::string result_summary;
};

struct AgentTurnInput {
    std::string instruction;
    Observation observation;
    std::string kb_fragment;
    std::vector<HistoryEntry> history;
    int remaining_steps = 0;
};

/// Short human-readable flag summary, e.g. "effect" or "out_of_range, revisit".
std::string summarize_flags(const StepFlags& flags);

/// The fixed system preamble describing the action grammar.
const std::string& system_preamble();

/// Everything after the preamble: knowledge (if any), task, screen,
/// history, reply instruction.
std::string build_user_message(const AgentTurnInput& input);

/// Preamble followed by the user message. Pure and byte-stable.
std::string build_prompt(const AgentTurnInput& input);

} // namespace kgce
