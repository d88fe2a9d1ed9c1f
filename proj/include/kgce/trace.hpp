#pragma once

#include "kgce/dual_graph_eval.hpp"
#include "kgce/env_sim.hpp"

#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kTraceSchema = "kgce-trace/1";

/// Line-delimited episode log: one header record, one record per executed
/// step, one end record. It carries everything evaluation needs, so metrics
/// can be recomputed from the trace and the task alone.
struct TraceHeader {
    std::string task_id;
    std::string run_label;
    std::string agent;
    bool kb_enabled = false;
    std::vector<std::string> kb_invoked;
    int max_steps = 0;
    StateSignature initial_signature;
};

struct TraceStep {
    int step = 0;
    /// Rendered action; empty when the reply did not parse.
    std::string action;
    /// Model reply text (model agents only).
    std::string raw_reply;
    std::string parse_error;
    StepFlags flags;
    bool is_back_action = false;
    StateSignature pre;
    StateSignature post;
    std::string observation_digest;
    /// Sub-goals that completed right after this step.
    std::vector<std::string> completed;
};

struct TraceEnd {
    TerminalCause terminal = TerminalCause::done_signaled;
    std::string error;
};

struct Trace {
    TraceHeader header;
    std::vector<TraceStep> steps;
    TraceEnd end;
};

std::string trace_to_jsonl(const Trace& trace);
/// Throws ParseError / SchemaViolation with the offending line number.
Trace trace_from_jsonl(std::istream& in);
Trace load_trace(const std::filesystem::path& file);

/// Rebuilds the episode, re-deriving completion through mark_complete so
/// a trace that violates dependency order is rejected.
EpisodeRecord episode_from_trace(const Trace& trace, std::shared_ptr<const TaskSpec> task);

} // namespace kgce
