#include "kgce/dual_graph_eval.hpp"

#include "kgce/error.hpp"

#include <set>
#include <stdexcept>

namespace kgce {

using nlohmann::json;

std::string_view to_string(TerminalCause cause) {
    switch (cause) {
    case TerminalCause::done_signaled: return "done_signaled";
    case TerminalCause::max_steps_reached: return "max_steps_reached";
    case TerminalCause::script_exhausted: return "script_exhausted";
    case TerminalCause::agent_error: return "agent_error";
    }
    return "unknown";
}

std::optional<TerminalCause> parse_terminal_cause(std::string_view text) {
    for (auto c : {TerminalCause::done_signaled, TerminalCause::max_steps_reached, TerminalCause::script_exhausted,
                   TerminalCause::agent_error}) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

std::string_view to_string(CpaMode mode) {
    return mode == CpaMode::literal ? "literal" : "subgoal_per_action";
}

std::optional<CpaMode> parse_cpa_mode(std::string_view text) {
    if (text == "literal") return CpaMode::literal;
    if (text == "subgoal_per_action") return CpaMode::subgoal_per_action;
    return std::nullopt;
}

void check_episode(const EpisodeRecord& ep) {
    if (!ep.task) throw InvariantViolation("episode has no task");
    if (ep.completion.task_ptr() != ep.task && !(ep.completion.task() == *ep.task)) {
        throw InvariantViolation("completion state belongs to a different task");
    }
    const auto n = static_cast<int>(ep.steps.size());
    if (n > ep.task->max_steps) {
        throw InvariantViolation("episode has " + std::to_string(n) + " steps, budget is " +
                                 std::to_string(ep.task->max_steps));
    }
    if (ep.terminal == TerminalCause::max_steps_reached && n != ep.task->max_steps) {
        throw InvariantViolation("max_steps_reached with " + std::to_string(n) + " of " +
                                 std::to_string(ep.task->max_steps) + " steps");
    }
    int last = 0;
    for (const auto& c : ep.completion.completion_order()) {
        if (c.step_index < 1 || c.step_index > n) {
            throw InvariantViolation("node '" + c.node_id + "' completed at step " + std::to_string(c.step_index) +
                                     " outside 1.." + std::to_string(n));
        }
        if (c.step_index < last) throw InvariantViolation("completion step indices decrease");
        last = c.step_index;
    }
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
        const auto& f = ep.steps[i].flags;
        if (f.out_of_range && f.effect_applied) {
            throw InvariantViolation("step " + std::to_string(i + 1) + " is out of range yet applied an effect");
        }
        if (f.invalid_target && f.effect_applied) {
            throw InvariantViolation("step " + std::to_string(i + 1) + " has an invalid target yet applied an effect");
        }
    }
}

bool classify_backtrack(const StepRecord& step) { return step.is_back_action || step.flags.revisit; }

namespace {

double ratio(int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

} // namespace

MetricsReport evaluate_episode(const EpisodeRecord& ep, CpaMode mode) {
    check_episode(ep);
    MetricsReport r;
    MetricCounts& c = r.counts;
    const TaskSpec& task = *ep.task;

    c.nodes = static_cast<int>(task.nodes.size());
    c.completed_nodes = static_cast<int>(ep.completion.completed().size());
    std::set<int> completing;
    for (const auto& done : ep.completion.completion_order()) completing.insert(done.step_index);
    c.completing_actions = static_cast<int>(completing.size());
    for (const auto& node : task.nodes) {
        if (!node.key_step) continue;
        ++c.key_steps;
        if (ep.completion.is_complete(node.id)) ++c.covered_key_steps;
    }
    c.operations = static_cast<int>(ep.steps.size());
    for (const auto& s : ep.steps) {
        if (s.flags.effect_applied) ++c.completed_actions;
        if (classify_backtrack(s)) ++c.backtracks;
        if (s.flags.out_of_range) ++c.out_of_range;
    }

    r.cr = ratio(c.completed_nodes, c.nodes);
    r.cpa = mode == CpaMode::literal ? ratio(c.completed_actions, c.operations)
                                     : ratio(c.completing_actions, c.operations);
    r.precision = ratio(c.completed_actions, c.operations);
    r.recall = c.key_steps == 0 ? 1.0 : ratio(c.covered_key_steps, c.key_steps);
    r.f1 = (r.precision + r.recall) == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.br = ratio(c.backtracks, c.operations);
    r.oor_rate = ratio(c.out_of_range, c.operations);
    r.rms = ep.terminal == TerminalCause::max_steps_reached;
    return r;
}

double metric_value(const MetricsReport& report, std::string_view key) {
    if (key == "cr") return report.cr;
    if (key == "cpa") return report.cpa;
    if (key == "precision") return report.precision;
    if (key == "recall") return report.recall;
    if (key == "f1") return report.f1;
    if (key == "br") return report.br;
    if (key == "oor") return report.oor_rate;
    if (key == "rms") return report.rms ? 1.0 : 0.0;
    throw std::out_of_range("unknown metric '" + std::string(key) + "'");
}

json metrics_to_json(const StoredMetrics& stored) {
    const auto& r = stored.report;
    const auto& c = r.counts;
    return {{"schema", std::string(kMetricsSchema)},
            {"task_id", stored.task_id},
            {"run", stored.run_label},
            {"terminal", std::string(to_string(stored.terminal))},
            {"cpa_mode", std::string(to_string(stored.cpa_mode))},
            {"metrics",
             {{"cr", r.cr},
              {"cpa", r.cpa},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"br", r.br},
              {"oor_rate", r.oor_rate},
              {"rms", r.rms}}},
            {"counts",
             {{"V", c.nodes},
              {"completed_nodes", c.completed_nodes},
              {"completing_actions", c.completing_actions},
              {"K", c.key_steps},
              {"covered_key_steps", c.covered_key_steps},
              {"ONU", c.operations},
              {"ANU", c.operations},
              {"CAN", c.completed_actions},
              {"IO", c.backtracks},
              {"OoR_count", c.out_of_range}}}};
}

StoredMetrics metrics_from_json(const json& doc) {
    json_util::expect_schema(doc, kMetricsSchema);
    StoredMetrics out;
    out.task_id = json_util::require_string(doc, "task_id", "$");
    out.run_label = json_util::optional_string(doc, "run", "$");
    auto terminal = parse_terminal_cause(json_util::require_string(doc, "terminal", "$"));
    if (!terminal) throw SchemaViolation("$.terminal", "unknown terminal cause");
    out.terminal = *terminal;
    auto mode = parse_cpa_mode(json_util::optional_string(doc, "cpa_mode", "$", "subgoal_per_action"));
    if (!mode) throw SchemaViolation("$.cpa_mode", "unknown CPA mode");
    out.cpa_mode = *mode;

    const json& m = json_util::require(doc, "metrics", "$");
    auto& r = out.report;
    r.cr = json_util::require_number(m, "cr", "$.metrics");
    r.cpa = json_util::require_number(m, "cpa", "$.metrics");
    r.precision = json_util::require_number(m, "precision", "$.metrics");
    r.recall = json_util::require_number(m, "recall", "$.metrics");
    r.f1 = json_util::require_number(m, "f1", "$.metrics");
    r.br = json_util::require_number(m, "br", "$.metrics");
    r.oor_rate = json_util::require_number(m, "oor_rate", "$.metrics");
    r.rms = json_util::optional_bool(m, "rms", "$.metrics", false);

    const json& c = json_util::require(doc, "counts", "$");
    auto count = [&](std::string_view key) { return static_cast<int>(json_util::require_int(c, key, "$.counts")); };
    r.counts.nodes = count("V");
    r.counts.completed_nodes = count("completed_nodes");
    r.counts.completing_actions = count("completing_actions");
    r.counts.key_steps = count("K");
    r.counts.covered_key_steps = count("covered_key_steps");
    r.counts.operations = count("ONU");
    r.counts.completed_actions = count("CAN");
    r.counts.backtracks = count("IO");
    r.counts.out_of_range = count("OoR_count");
    return out;
}

} // namespace kgce
