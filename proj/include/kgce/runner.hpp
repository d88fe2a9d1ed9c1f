#pragma once

#include "kgce/agent.hpp"
#include "kgce/analysis.hpp"
#include "kgce/chat_client.hpp"
#include "kgce/dual_graph_eval.hpp"
#include "kgce/env_sim.hpp"
#include "kgce/json_util.hpp"
#include "kgce/knowledge_base.hpp"
#include "kgce/trace.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kRunConfigSchema = "kgce-run/1";

enum class AgentKind { scripted, model };

struct RunConfig {
    std::string label = "run";
    std::filesystem::path tasks_dir;
    std::filesystem::path world_file;
    std::optional<std::filesystem::path> kb_file;
    AgentKind agent = AgentKind::scripted;
    std::optional<std::filesystem::path> script_dir;
    std::optional<ModelEndpointConfig> model;
    /// Intent plans for a "mock:" endpoint.
    std::optional<std::filesystem::path> mock_plans;
    bool kb_enabled = false;
    std::size_t kb_budget = kDefaultKbBudget;
    int parallelism = 1;
    std::filesystem::path output_dir;
    long long seed = 0;
    CpaMode cpa_mode = CpaMode::subgoal_per_action;

    /// Throws ConfigError.
    void validate() const;
};

/// Relative paths resolve against `base_dir` (normally the config file's
/// directory). An empty model base_url falls back to KGCE_MODEL_BASE_URL.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& file);

/// True for endpoints served by the in-process intent mock.
bool is_mock_endpoint(std::string_view base_url);

struct EpisodeContext {
    std::shared_ptr<const TaskSpec> task;
    std::shared_ptr<const WorldModel> world;
    /// Null when the run has no knowledge base or it is disabled.
    const KnowledgeBase* kb = nullptr;
    std::size_t kb_budget = kDefaultKbBudget;
    std::string run_label;
    std::string agent_name;
};

/// reset, then observe -> agent turn -> step -> checkers until a terminal
/// condition. done() ends the episode without being recorded as a step.
Trace run_episode(const EpisodeContext& ctx, Agent& agent);

/// Metrics are always recomputed from the trace, never from live state.
StoredMetrics evaluate_trace(const Trace& trace, std::shared_ptr<const TaskSpec> task, CpaMode mode);

struct RunSummary {
    std::filesystem::path run_dir;
    std::vector<StoredMetrics> metrics;  // sorted by task id
    RunAggregate aggregate;
    /// Tasks whose episode ended with agent_error.
    std::vector<std::string> failed_tasks;
};

/// Loads and validates everything before any episode runs, executes the
/// episodes on `parallelism` workers and writes
///   traces/<task>.jsonl, metrics/<task>.json, aggregate.json, aggregate.csv
/// under output_dir. `client_override` replaces the configured transport.
RunSummary run_benchmark(const RunConfig& config, ChatClient* client_override = nullptr);

} // namespace kgce
