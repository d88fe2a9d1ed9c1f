#include "kgce/runner.hpp"

#include "kgce/checkers.hpp"
#include "kgce/error.hpp"
#include "kgce/mock_model.hpp"
#include "kgce/task_io.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstdlib>
#include <set>
#include <thread>

namespace kgce {

using nlohmann::json;
namespace fs = std::filesystem;

bool is_mock_endpoint(std::string_view base_url) { return base_url.rfind("mock:", 0) == 0; }

void RunConfig::validate() const {
    if (label.empty()) throw ConfigError("run label is empty");
    if (tasks_dir.empty()) throw ConfigError("tasks directory is not set");
    if (world_file.empty()) throw ConfigError("world file is not set");
    if (output_dir.empty()) throw ConfigError("output directory is not set");
    if (parallelism < 1) throw ConfigError("parallelism must be a positive integer");
    if (kb_enabled && !kb_file) throw ConfigError("kb_enabled requires a KB file");
    if (agent == AgentKind::scripted && !script_dir) throw ConfigError("scripted agent requires a script directory");
    if (agent == AgentKind::model) {
        if (!model) throw ConfigError("model agent requires an endpoint config");
        model->validate();
        if (is_mock_endpoint(model->base_url) && !mock_plans) throw ConfigError("mock endpoint requires mock_plans");
    }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& text) {
    fs::path p(text);
    return p.is_absolute() ? p : base / p;
}

std::optional<fs::path> optional_path(const json& doc, std::string_view key, const fs::path& base) {
    auto text = json_util::optional_string(doc, key, "$");
    if (text.empty()) return std::nullopt;
    return resolve(base, text);
}

} // namespace

RunConfig run_config_from_json(const json& doc, const fs::path& base_dir) {
    json_util::expect_schema(doc, kRunConfigSchema);
    RunConfig cfg;
    cfg.label = json_util::optional_string(doc, "label", "$", "run");
    cfg.tasks_dir = resolve(base_dir, json_util::require_string(doc, "tasks", "$"));
    cfg.world_file = resolve(base_dir, json_util::require_string(doc, "world", "$"));
    cfg.kb_file = optional_path(doc, "kb", base_dir);
    auto agent = json_util::require_string(doc, "agent", "$");
    if (agent == "scripted") {
        cfg.agent = AgentKind::scripted;
    } else if (agent == "model") {
        cfg.agent = AgentKind::model;
    } else {
        throw SchemaViolation("$.agent", "expected \"scripted\" or \"model\"");
    }
    cfg.script_dir = optional_path(doc, "scripts", base_dir);
    if (doc.contains("model")) {
        const json& m = doc.at("model");
        ModelEndpointConfig mc;
        mc.base_url = json_util::optional_string(m, "base_url", "$.model");
        if (mc.base_url.empty()) {
            if (const char* env = std::getenv("KGCE_MODEL_BASE_URL")) mc.base_url = env;
        }
        mc.model = json_util::optional_string(m, "model", "$.model");
        mc.api_key_env = json_util::optional_string(m, "api_key_env", "$.model", mc.api_key_env);
        if (m.contains("timeout_seconds")) mc.timeout_seconds = json_util::require_number(m, "timeout_seconds", "$.model");
        mc.max_retries = static_cast<int>(json_util::optional_int(m, "max_retries", "$.model", mc.max_retries));
        if (m.contains("temperature")) mc.temperature = json_util::require_number(m, "temperature", "$.model");
        cfg.model = mc;
        cfg.mock_plans = optional_path(m, "mock_plans", base_dir);
    }
    cfg.kb_enabled = json_util::optional_bool(doc, "kb_enabled", "$", false);
    auto budget = json_util::optional_int(doc, "kb_budget", "$", static_cast<long long>(kDefaultKbBudget));
    if (budget < 0) throw SchemaViolation("$.kb_budget", "must be >= 0");
    cfg.kb_budget = static_cast<std::size_t>(budget);
    cfg.parallelism = static_cast<int>(json_util::optional_int(doc, "parallelism", "$", 1));
    cfg.output_dir = resolve(base_dir, json_util::optional_string(doc, "output", "$", "run-" + cfg.label));
    cfg.seed = json_util::optional_int(doc, "seed", "$", 0);
    auto mode = parse_cpa_mode(json_util::optional_string(doc, "cpa_mode", "$", "subgoal_per_action"));
    if (!mode) throw SchemaViolation("$.cpa_mode", "expected \"subgoal_per_action\" or \"literal\"");
    cfg.cpa_mode = *mode;
    return cfg;
}

RunConfig load_run_config(const fs::path& file) {
    auto doc = json_util::read_file(file);
    try {
        return run_config_from_json(doc, file.parent_path());
    } catch (const SchemaViolation& e) {
        throw SchemaViolation(file.string() + ": " + e.path(), e.what());
    }
}

Trace run_episode(const EpisodeContext& ctx, Agent& agent) {
    const TaskSpec& task = *ctx.task;
    SessionState state = reset(ctx.world, task);
    CompletionTracker tracker(ctx.task, CheckerRegistry::builtin());

    Trace trace;
    auto& h = trace.header;
    h.task_id = task.task_id;
    h.run_label = ctx.run_label;
    h.agent = ctx.agent_name;
    h.kb_enabled = ctx.kb != nullptr;
    h.max_steps = task.max_steps;
    h.initial_signature = state_signature(state);

    std::string fragment;
    if (ctx.kb) {
        h.kb_invoked = decide_invocation(task.instruction, *ctx.kb);
        if (!h.kb_invoked.empty()) fragment = render_prompt_fragment(select_packages(*ctx.kb, h.kb_invoked), ctx.kb_budget);
    }

    std::vector<HistoryEntry> history;
    for (;;) {
        AgentTurnInput input{task.instruction, observe(state), fragment, history, task.max_steps - state.step_count()};
        AgentTurn turn;
        try {
            turn = agent.next(input);
        } catch (const TransportError& e) {
            trace.end = {TerminalCause::agent_error, e.what()};
            break;
        }
        if (turn.script_exhausted) {
            trace.end.terminal = TerminalCause::script_exhausted;
            break;
        }

        TraceStep ts;
        ts.raw_reply = turn.raw_reply;
        StepResult result;
        if (turn.action) {
            if (is_done(*turn.action)) {
                step(state, *turn.action);
                trace.end.terminal = TerminalCause::done_signaled;
                break;
            }
            result = step(state, *turn.action);
            ts.action = render_action(*turn.action);
            ts.is_back_action = is_back(*turn.action);
        } else {
            result = consume_unparsed_step(state);
            ts.parse_error = turn.failure ? turn.failure->failure.describe() : "no action";
        }
        ts.step = static_cast<int>(trace.steps.size()) + 1;
        ts.flags = result.flags;
        ts.pre = result.pre;
        ts.post = result.post;
        ts.observation_digest = observation_digest(result.observation);
        ts.completed = tracker.observe(state, ts.step);
        history.push_back({ts.action.empty() ? "(unparsed reply)" : ts.action, summarize_flags(ts.flags)});
        trace.steps.push_back(std::move(ts));

        if (result.terminal == Terminal::max_steps_reached) {
            trace.end.terminal = TerminalCause::max_steps_reached;
            break;
        }
    }
    return trace;
}

StoredMetrics evaluate_trace(const Trace& trace, std::shared_ptr<const TaskSpec> task, CpaMode mode) {
    EpisodeRecord ep = episode_from_trace(trace, task);
    return {trace.header.task_id, trace.header.run_label, trace.end.terminal, mode, evaluate_episode(ep, mode)};
}

namespace {

struct Prepared {
    std::vector<std::shared_ptr<const TaskSpec>> tasks;
    std::shared_ptr<const WorldModel> world;
    std::optional<KnowledgeBase> kb;
    std::map<std::string, std::vector<Action>> scripts;
    std::unique_ptr<ChatClient> owned_client;
};

Prepared prepare(const RunConfig& config, ChatClient* client_override) {
    config.validate();
    Prepared p;
    std::set<std::string> ids;
    for (auto& task : load_task_dir(config.tasks_dir)) {
        if (!ids.insert(task.task_id).second) throw ConfigError("duplicate task id '" + task.task_id + "'");
        p.tasks.push_back(std::make_shared<const TaskSpec>(std::move(task)));
    }
    if (p.tasks.empty()) throw ConfigError("no tasks found in " + config.tasks_dir.string());
    std::sort(p.tasks.begin(), p.tasks.end(), [](const auto& a, const auto& b) { return a->task_id < b->task_id; });
    p.world = std::make_shared<const WorldModel>(load_world(config.world_file));
    if (config.kb_file) p.kb = load_kb_file(*config.kb_file);

    for (const auto& task : p.tasks) {
        // Fail fast on anything an episode would trip over later.
        CompletionTracker(task, CheckerRegistry::builtin());
        reset(p.world, *task);
        if (config.agent == AgentKind::scripted) {
            auto file = *config.script_dir / (task->task_id + ".actions");
            if (!fs::exists(file)) throw ConfigError("no script for task '" + task->task_id + "': " + file.string());
            p.scripts[task->task_id] = load_script(file);
        }
    }
    if (config.agent == AgentKind::model && !client_override) {
        if (is_mock_endpoint(config.model->base_url)) {
            p.owned_client = std::make_unique<IntentMockClient>(load_mock_plans(*config.mock_plans));
        } else {
            const char* key = std::getenv(config.model->api_key_env.c_str());
            p.owned_client = std::make_unique<HttpChatClient>(config.model->base_url, key ? key : "",
                                                              config.model->timeout_seconds);
        }
    }
    return p;
}

} // namespace

RunSummary run_benchmark(const RunConfig& config, ChatClient* client_override) {
    Prepared p = prepare(config, client_override);
    ChatClient* client = client_override ? client_override : p.owned_client.get();
    const KnowledgeBase* kb = config.kb_enabled && p.kb ? &*p.kb : nullptr;
    const std::string agent_name =
        config.agent == AgentKind::scripted ? "scripted" : "model:" + config.model->model;

    std::vector<Trace> traces(p.tasks.size());
    std::vector<std::exception_ptr> errors(p.tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < p.tasks.size(); i = next++) {
            const auto& task = p.tasks[i];
            EpisodeContext ctx{task, p.world, kb, config.kb_budget, config.label, agent_name};
            try {
                if (config.agent == AgentKind::scripted) {
                    ScriptedAgent agent(p.scripts.at(task->task_id));
                    traces[i] = run_episode(ctx, agent);
                } else {
                    ModelAgent agent(*client, *config.model, real_sleeper());
                    traces[i] = run_episode(ctx, agent);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), p.tasks.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    // Persist in task-id order so the layout does not depend on scheduling.
    RunSummary summary;
    summary.run_dir = config.output_dir;
    std::vector<MetricsReport> reports;
    for (std::size_t i = 0; i < p.tasks.size(); ++i) {
        const auto& id = p.tasks[i]->task_id;
        auto stored = evaluate_trace(traces[i], p.tasks[i], config.cpa_mode);
        json_util::write_file(config.output_dir / "traces" / (id + ".jsonl"), trace_to_jsonl(traces[i]));
        json_util::write_file(config.output_dir / "metrics" / (id + ".json"), json_util::dump(metrics_to_json(stored)));
        if (traces[i].end.terminal == TerminalCause::agent_error) summary.failed_tasks.push_back(id);
        reports.push_back(stored.report);
        summary.metrics.push_back(std::move(stored));
    }
    summary.aggregate = aggregate(reports, config.label);
    ReportData data;
    data.aggregates.push_back(summary.aggregate);
    json_util::write_file(config.output_dir / "aggregate.json", emit_report(data, ReportFormat::json));
    json_util::write_file(config.output_dir / "aggregate.csv", emit_report(data, ReportFormat::csv));
    return summary;
}

} // namespace kgce
