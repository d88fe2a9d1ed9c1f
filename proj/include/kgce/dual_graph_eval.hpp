#pragma once

#include "kgce/env_sim.hpp"
#include "kgce/json_util.hpp"
#include "kgce/task_graph.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kMetricsSchema = "kgce-metrics/1";

enum class TerminalCause { done_signaled, max_steps_reached, script_exhausted, agent_error };
std::string_view to_string(TerminalCause cause);
std::optional<TerminalCause> parse_terminal_cause(std::string_view text);

/// One executed operation. `done()` never produces a StepRecord.
struct StepRecord {
    std::string action;
    StepFlags flags;
    bool is_back_action = false;
};

struct EpisodeRecord {
    std::shared_ptr<const TaskSpec> task;
    std::vector<StepRecord> steps;
    CompletionState completion;
    TerminalCause terminal = TerminalCause::done_signaled;
};

struct MetricCounts {
    int nodes = 0;               // |V|
    int completed_nodes = 0;
    int completing_actions = 0;  // steps that completed at least one sub-goal
    int key_steps = 0;           // |K|
    int covered_key_steps = 0;
    int operations = 0;          // ONU (= ANU)
    int completed_actions = 0;   // CAN
    int backtracks = 0;          // IO
    int out_of_range = 0;

    bool operator==(const MetricCounts&) const = default;
};

struct MetricsReport {
    double cr = 0;
    double cpa = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double br = 0;
    double oor_rate = 0;
    bool rms = false;
    MetricCounts counts;

    bool operator==(const MetricsReport&) const = default;
};

/// How CPA's numerator is read. `subgoal_per_action` counts actions that
/// completed a sub-goal; `literal` counts effectful actions, which makes
/// CPA coincide with Precision.
enum class CpaMode { subgoal_per_action, literal };
std::string_view to_string(CpaMode mode);
std::optional<CpaMode> parse_cpa_mode(std::string_view text);

/// Throws InvariantViolation.
void check_episode(const EpisodeRecord& ep);

/// IO classification: explicit back() or a return to an earlier state.
bool classify_backtrack(const StepRecord& step);

MetricsReport evaluate_episode(const EpisodeRecord& ep, CpaMode mode = CpaMode::subgoal_per_action);

/// Metric keys in reporting order: cr, cpa, precision, recall, f1, br, oor, rms.
inline constexpr std::array<std::string_view, 8> kMetricKeys = {"cr", "cpa", "precision", "recall",
                                                               "f1", "br",  "oor",       "rms"};
/// Column labels matching kMetricKeys.
inline constexpr std::array<std::string_view, 8> kMetricLabels = {"CR", "CPA", "Precision", "Recall",
                                                                 "F1", "BR",  "OoR",       "RMS"};

/// Value of a metric by key; rms is 0 or 1. Throws std::out_of_range.
double metric_value(const MetricsReport& report, std::string_view key);

struct StoredMetrics {
    std::string task_id;
    std::string run_label;
    TerminalCause terminal = TerminalCause::done_signaled;
    CpaMode cpa_mode = CpaMode::subgoal_per_action;
    MetricsReport report;
};

nlohmann::json metrics_to_json(const StoredMetrics& stored);
StoredMetrics metrics_from_json(const nlohmann::json& doc);

} // namespace kgce
