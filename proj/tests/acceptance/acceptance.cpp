// Acceptance checks, one line per criterion. Run with --criterion N to run a
// single check; the exit status is nonzero when any selected check fails.

#include "CLI11.hpp"
#include "json.hpp"

#include "kgce/action_parser.hpp"
#include "kgce/agent.hpp"
#include "kgce/analysis.hpp"
#include "kgce/dual_graph_eval.hpp"
#include "kgce/json_util.hpp"
#include "kgce/knowledge_base.hpp"
#include "kgce/runner.hpp"
#include "kgce/task_graph.hpp"
#include "kgce/task_io.hpp"
#include "kgce/trace.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

using namespace kgce;
using kgce::testing::Rng;
namespace fs = std::filesystem;

namespace {

// Published improvements are rounded to two decimals.
constexpr double kImproveTolerance = 0.02;
constexpr double kPearsonTolerance = 1e-12;
constexpr int kOracleEpisodes = 1000;
constexpr int kDagTrials = 2000;
constexpr int kEnsembleEpisodes = 240;
constexpr int kRoundTrips = 10000;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct PublishedRow {
    const char* metric;
    double without;
    double with;
    double improve;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Outcome check_rows(const std::string& who, const std::vector<PublishedRow>& rows) {
    Outcome o;
    int bad = 0;
    double worst = 0;
    std::string misses;
    for (const auto& r : rows) {
        double got = *improve_percent(r.without, r.with);
        double diff = std::abs(got - r.improve);
        worst = std::max(worst, diff);
        if (diff > kImproveTolerance) {
            ++bad;
            misses += " " + who + "/" + r.metric + fmt(" %.2f->%.2f gives %+.3f", r.without, r.with, got) +
                      fmt(" (published %+.2f);", r.improve);
        }
    }
    o.pass = bad == 0;
    o.detail = std::to_string(rows.size() - static_cast<std::size_t>(bad)) + "/" + std::to_string(rows.size()) +
               " rows within 0.02" + fmt(", worst deviation %.3f", worst) + misses;
    return o;
}

Outcome criterion1() {
    return check_rows("overall", {{"CR", 60.02, 75.26, 25.39},
                                  {"CPA", 7.22, 11.29, 56.37},
                                  {"Precision", 24.68, 32.84, 33.06},
                                  {"Recall", 63.87, 75.79, 18.66},
                                  {"F1", 33.96, 44.96, 32.39},
                                  {"BR", 52.01, 41.47, -20.27},
                                  {"OoR", 13.42, 7.54, -43.81},
                                  {"RMS", 46.33, 31.27, -32.51}});
}

Outcome criterion2() {
    auto qwen = check_rows("Qwen", {{"CR", 52.88, 76.53, 44.72},
                                    {"CPA", 5.82, 12.09, 107.73},
                                    {"Precision", 21.63, 35.79, 65.46},
                                    {"Recall", 56.79, 79.12, 39.32},
                                    {"F1", 28.95, 48.45, 67.43},
                                    {"BR", 53.71, 38.20, -28.88},
                                    {"OoR", 29.41, 14.71, -49.19},
                                    {"RMS", 41.58, 25.49, -38.70}});
    auto gpt = check_rows("GPT-4o", {{"CR", 65.39, 77.21, 18.08},
                                     {"CPA", 8.71, 12.63, 45.01},
                                     {"Precision", 28.33, 35.37, 24.85},
                                     {"Recall", 68.92, 76.59, 11.13},
                                     {"F1", 38.51, 47.71, 23.89},
                                     {"BR", 49.08, 36.12, -26.41},
                                     {"OoR", 8.91, 5.94, -33.33},
                                     {"RMS", 43.56, 21.78, -50.00}});
    auto gemini = check_rows("Gemini", {{"CR", 61.80, 72.03, 16.55},
                                        {"CPA", 7.14, 9.16, 28.29},
                                        {"Precision", 24.08, 27.35, 13.58},
                                        {"Recall", 65.91, 71.66, 8.72},
                                        {"F1", 34.43, 38.72, 12.46},
                                        {"BR", 53.25, 50.08, -6.07},
                                        {"OoR", 1.92, 1.98, 3.13},
                                        {"RMS", 53.85, 46.53, -13.59}});
    return {qwen.pass && gpt.pass && gemini.pass, qwen.detail + " | " + gpt.detail + " | " + gemini.detail};
}

RunConfig golden_config(const fs::path& scripts, const fs::path& out) {
    auto fx = kgce::testing::fixtures_dir();
    auto tasks = kgce::testing::scratch_dir("acc_golden_tasks");
    fs::copy_file(fx / "golden" / "xiaoya_hw_to_tasks.json", tasks / "xiaoya_hw_to_tasks.json");
    RunConfig c;
    c.label = "golden";
    c.tasks_dir = tasks;
    c.world_file = fx / "world.json";
    c.agent = AgentKind::scripted;
    c.script_dir = scripts;
    c.output_dir = out;
    return c;
}

Outcome criterion3() {
    auto fx = kgce::testing::fixtures_dir();
    auto r = run_benchmark(golden_config(fx / "golden", kgce::testing::scratch_dir("acc_golden"))).metrics.at(0).report;
    Outcome o;
    o.pass = r.cr == 1.0 && r.cpa == 1.0 && r.precision == 1.0 && r.recall == 1.0 && r.f1 == 1.0 && r.br == 0.0 &&
             r.oor_rate == 0.0 && !r.rms;
    o.detail = fmt("optimal: CR=%g CPA=%g P=%g", r.cr, r.cpa, r.precision) + fmt(" R=%g F1=%g BR=%g", r.recall, r.f1, r.br) +
               fmt(" OoR=%g RMS=%g", r.oor_rate, r.rms);

    std::ifstream in(fx / "golden" / "xiaoya_hw_to_tasks.actions");
    std::stringstream script;
    script << in.rdbuf();
    for (int n = 1; n <= 3; ++n) {
        auto scripts = kgce::testing::scratch_dir("acc_golden_backs" + std::to_string(n));
        std::string backs;
        for (int i = 0; i < n; ++i) backs += "back()\n";
        std::ofstream(scripts / "xiaoya_hw_to_tasks.actions") << backs << script.str();
        auto m = run_benchmark(golden_config(scripts, kgce::testing::scratch_dir("acc_golden_out" + std::to_string(n))))
                     .metrics.at(0)
                     .report;
        double want = static_cast<double>(n) / (5.0 + n);
        bool ok = m.br == want && m.cr == 1.0;
        o.pass = o.pass && ok;
        o.detail += fmt("; n=%g BR=%.6f want %.6f", n, m.br, want);
    }
    return o;
}

Outcome criterion4() {
    Rng rng(2024);
    int mismatches = 0;
    for (int i = 0; i < kOracleEpisodes; ++i) {
        auto ep = kgce::testing::random_episode(rng, 12, 6);
        for (auto mode : {CpaMode::subgoal_per_action, CpaMode::literal}) {
            if (!(evaluate_episode(ep, mode) == kgce::testing::brute_force_metrics(ep, mode))) ++mismatches;
        }
    }
    return {mismatches == 0,
            std::to_string(kOracleEpisodes) + " episodes x 2 CPA modes, " + std::to_string(mismatches) + " mismatches"};
}

Outcome criterion5() {
    Rng rng(7);
    int failures = 0;
    int orders_checked = 0;
    for (int trial = 0; trial < kDagTrials; ++trial) {
        auto spec = std::make_shared<const TaskSpec>(kgce::testing::random_dag(rng, 10));
        if (!validate_dag(*spec).ok()) ++failures;
        auto order = topo_order(*spec);
        failures += kgce::testing::is_topological(*spec, order) ? 0 : 1;
        ++orders_checked;

        CompletionState state(spec);
        double last_cr = completion_ratio(state);
        for (int s = 1;; ++s) {
            auto f = frontier(state);
            if (f != kgce::testing::brute_frontier(*spec, state.completed())) ++failures;
            if (f.empty()) break;
            auto it = f.begin();
            std::advance(it, kgce::testing::uniform(rng, 0, static_cast<int>(f.size()) - 1));
            state = mark_complete(state, *it, s);
            if (!kgce::testing::downward_closed(*spec, state.completed())) ++failures;
            double cr = completion_ratio(state);
            if (cr < last_cr) ++failures;
            last_cr = cr;
        }
        if (last_cr != 1.0) ++failures;
    }
    return {failures == 0, std::to_string(kDagTrials) + " random DAGs (<=10 nodes), " + std::to_string(orders_checked) +
                               " topological orders, " + std::to_string(failures) + " property failures"};
}

Outcome criterion6() {
    std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{3, 2, 1}, x{1, 2, 3, 4}, y{1, 3, 2, 4};
    double r1 = *pearson(a, b), r2 = *pearson(a, c), r3 = *pearson(x, y);
    bool closed = std::abs(r1 - 1.0) <= kPearsonTolerance && std::abs(r2 + 1.0) <= kPearsonTolerance &&
                  std::abs(r3 - 0.8) <= kPearsonTolerance;

    Rng rng(99);
    std::vector<MetricsReport> reports;
    for (int i = 0; i < 300; ++i) reports.push_back(evaluate_episode(kgce::testing::random_episode(rng)));
    std::vector<std::string> keys(kMetricKeys.begin(), kMetricKeys.end());
    auto m = pearson_matrix(reports, keys);
    bool structural = true;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        structural = structural && m.r[i][i] && *m.r[i][i] == 1.0;
        for (std::size_t j = 0; j < keys.size(); ++j) structural = structural && m.r[i][j] == m.r[j][i];
    }
    return {closed && structural, fmt("r=%.15f, %.15f, %.15f", r1, r2, r3) +
                                      (structural ? "; 8x8 matrix symmetric, unit diagonal" : "; matrix structure broken")};
}

// Episodes whose success is driven by a latent skill: accurate actions
// complete the next sub-goal, the rest are backs, off-screen taps or misses.
EpisodeRecord planted_episode(Rng& rng, const std::shared_ptr<const TaskSpec>& task) {
    const double skill = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const auto order = topo_order(*task);
    EpisodeRecord ep{task, {}, CompletionState(task), TerminalCause::done_signaled};
    std::size_t next = 0;
    for (int s = 1; s <= task->max_steps; ++s) {
        StepRecord rec;
        if (kgce::testing::coin(rng, skill)) {
            rec.action = "tap(next)";
            rec.flags.effect_applied = true;
            ep.completion = mark_complete(ep.completion, order[next++], s);
        } else {
            switch (kgce::testing::uniform(rng, 0, 2)) {
            case 0:
                rec.action = "back()";
                rec.is_back_action = true;
                rec.flags.effect_applied = true;
                break;
            case 1:
                rec.action = "tap_xy(-5, 40)";
                rec.flags.out_of_range = true;
                rec.flags.revisit = true;
                break;
            default:
                rec.action = "tap(missing)";
                rec.flags.invalid_target = true;
                rec.flags.revisit = true;
                break;
            }
        }
        ep.steps.push_back(rec);
        if (next == order.size()) return ep;
    }
    ep.terminal = TerminalCause::max_steps_reached;
    return ep;
}

Outcome criterion7() {
    TaskSpec t;
    t.task_id = "ensemble";
    t.instruction = "planted";
    t.platforms = {Platform::mobile};
    for (int i = 0; i < 6; ++i) {
        t.nodes.push_back({"n" + std::to_string(i), "", i % 2 == 0 || i == 5, {"app_opened", {{"app", "A"}}}});
        if (i > 0) t.edges.push_back({"n" + std::to_string(i - 1), "n" + std::to_string(i)});
    }
    t.max_steps = 12;
    auto task = std::make_shared<const TaskSpec>(t);

    Rng rng(314);
    std::vector<MetricsReport> reports;
    for (int i = 0; i < kEnsembleEpisodes; ++i) reports.push_back(evaluate_episode(planted_episode(rng, task)));
    std::vector<std::string> keys{"cr", "precision", "recall", "f1", "br", "oor", "rms"};
    auto m = pearson_matrix(reports, keys);
    Outcome o;
    o.detail = std::to_string(kEnsembleEpisodes) + " episodes; r vs CR:";
    for (std::size_t j = 1; j < keys.size(); ++j) {
        const auto& r = m.r[0][j];
        bool want_positive = j <= 3;
        bool ok = r && (want_positive ? *r > 0 : *r < 0);
        o.pass = o.pass && ok;
        o.detail += " " + keys[j] + (r ? fmt("=%+.3f", *r) : std::string("=n/a"));
    }
    return o;
}

RunConfig mock_run(const std::string& label, bool kb, int parallelism, const fs::path& out) {
    auto cfg = load_run_config(kgce::testing::fixtures_dir() / "runs" / "mock_with_kb.json");
    cfg.label = label;
    cfg.kb_enabled = kb;
    cfg.parallelism = parallelism;
    cfg.output_dir = out;
    return cfg;
}

bool mentions_any(const std::string& instruction, const KnowledgePackage& pkg) {
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return s;
    };
    auto text = lower(instruction);
    if (text.find(lower(pkg.package_name)) != std::string::npos) return true;
    return std::any_of(pkg.aliases.begin(), pkg.aliases.end(),
                       [&](const std::string& a) { return text.find(lower(a)) != std::string::npos; });
}

Outcome criterion8() {
    auto out_with = kgce::testing::scratch_dir("acc_with_kb");
    auto with = run_benchmark(mock_run("with_kb", true, 2, out_with)).aggregate.value("cr");
    auto without =
        run_benchmark(mock_run("without_kb", false, 2, kgce::testing::scratch_dir("acc_without_kb"))).aggregate.value("cr");

    auto kb = load_kb_file(kgce::testing::fixtures_dir() / "kb.json");
    int disagreements = 0, invoked = 0, tasks = 0;
    for (const auto& task : load_task_dir(kgce::testing::fixtures_dir() / "tasks")) {
        ++tasks;
        std::vector<std::string> expect;
        for (const auto& pkg : kb) {
            if (mentions_any(task.instruction, pkg)) expect.push_back(pkg.package_name);
        }
        auto got = decide_invocation(task.instruction, kb);
        auto recorded = load_trace(out_with / "traces" / (task.task_id + ".jsonl")).header.kb_invoked;
        std::sort(expect.begin(), expect.end());
        std::sort(got.begin(), got.end());
        std::sort(recorded.begin(), recorded.end());
        if (got != expect || recorded != expect) ++disagreements;
        invoked += expect.empty() ? 0 : 1;
    }
    Outcome o;
    o.pass = with > without && disagreements == 0;
    o.detail = fmt("CR with KB %.4f vs without %.4f", with, without) + "; invocation fired on " + std::to_string(invoked) +
               "/" + std::to_string(tasks) + " tasks, " + std::to_string(disagreements) + " disagreements with name/alias scan";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion9() {
    auto a = kgce::testing::scratch_dir("acc_det_a");
    auto b = kgce::testing::scratch_dir("acc_det_b");
    run_benchmark(mock_run("det", true, 1, a));
    run_benchmark(mock_run("det", true, 4, b));
    int files = 0, differing = 0, reeval_mismatch = 0;
    for (const auto& e : fs::directory_iterator(a / "metrics")) {
        ++files;
        if (slurp(e.path()) != slurp(b / "metrics" / e.path().filename())) ++differing;
    }
    if (slurp(a / "aggregate.json") != slurp(b / "aggregate.json")) ++differing;
    for (const auto& task : load_task_dir(kgce::testing::fixtures_dir() / "tasks")) {
        auto stored = slurp(a / "metrics" / (task.task_id + ".json"));
        auto again = evaluate_trace(load_trace(a / "traces" / (task.task_id + ".jsonl")),
                                    std::make_shared<const TaskSpec>(task), CpaMode::subgoal_per_action);
        if (json_util::dump(metrics_to_json(again)) != stored) ++reeval_mismatch;
    }
    return {files > 0 && differing == 0 && reeval_mismatch == 0,
            std::to_string(files) + " metrics files, parallelism 1 vs 4: " + std::to_string(differing) +
                " differ; re-evaluation mismatches: " + std::to_string(reeval_mismatch)};
}

Outcome criterion10() {
    Rng rng(10);
    int broken = 0;
    for (int i = 0; i < kRoundTrips; ++i) {
        auto action = kgce::testing::random_action(rng);
        auto outcome = parse_action(render_action(action));
        if (!parsed_ok(outcome) || !(std::get<ParsedAction>(outcome).action == action)) ++broken;
    }
    auto cases = nlohmann::json::parse(slurp(kgce::testing::fixtures_dir() / "parser" / "malformed.json"));
    int misplaced = 0;
    std::string where;
    for (const auto& c : cases) {
        auto outcome = parse_action(c.at("reply").get<std::string>());
        if (parsed_ok(outcome) || std::get<ParseFailure>(outcome).position != c.at("position").get<std::size_t>()) {
            ++misplaced;
            where += " " + c.at("reply").get<std::string>();
        }
    }
    return {broken == 0 && misplaced == 0, std::to_string(kRoundTrips) + " round trips, " + std::to_string(broken) +
                                               " broken; " + std::to_string(cases.size()) + " malformed replies, " +
                                               std::to_string(misplaced) + " without the expected position" + where};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome()>> checks = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                           criterion6, criterion7, criterion8, criterion9, criterion10};
    bool all = true;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        int n = static_cast<int>(i + 1);
        if (only != 0 && only != n) continue;
        Outcome o;
        try {
            o = checks[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("criterion %d: %s - %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
