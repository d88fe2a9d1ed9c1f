// kgce: synthesize tasks, run episodes, re-evaluate traces, and report.

#include "CLI11.hpp"

#include "kgce/analysis.hpp"
#include "kgce/error.hpp"
#include "kgce/json_util.hpp"
#include "kgce/runner.hpp"
#include "kgce/task_io.hpp"
#include "kgce/task_synthesis.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace kgce;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 2;
constexpr int kExitIncomplete = 3;

void emit(const std::string& text, const std::string& out_file) {
    if (out_file.empty()) {
        std::cout << text;
    } else {
        json_util::write_file(out_file, text);
    }
}

CpaMode cpa_mode_or_throw(const std::string& text) {
    auto mode = parse_cpa_mode(text);
    if (!mode) throw ConfigError("unknown CPA mode '" + text + "'");
    return *mode;
}

/// A run directory (reads its aggregate.json) or an aggregate file.
RunAggregate load_aggregate(const fs::path& where) {
    fs::path file = fs::is_directory(where) ? where / "aggregate.json" : where;
    auto data = report_from_json(json_util::read_file(file));
    if (data.aggregates.size() != 1) {
        throw SchemaViolation(file.string() + ": $.aggregates", "expected exactly one aggregate");
    }
    return data.aggregates.front();
}

std::vector<MetricsReport> load_run_metrics(const fs::path& run_dir) {
    fs::path dir = run_dir / "metrics";
    if (!fs::is_directory(dir)) throw ConfigError("no metrics directory in " + run_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<MetricsReport> out;
    for (const auto& f : files) out.push_back(metrics_from_json(json_util::read_file(f)).report);
    return out;
}

std::vector<std::string> all_metric_keys() { return {kMetricKeys.begin(), kMetricKeys.end()}; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-augmented GUI agent benchmark harness"};
    app.require_subcommand(1);

    std::string templates_dir, bindings_file, synth_out;
    auto* synth = app.add_subcommand("synth", "Instantiate and compose task specs from templates");
    synth->add_option("--templates", templates_dir, "Template directory")->required();
    synth->add_option("--bindings", bindings_file, "Bindings document")->required();
    synth->add_option("--out", synth_out, "Output directory for task specs")->required();

    std::string config_file, run_out, run_label, kb_switch;
    int run_parallelism = 0;
    auto* run = app.add_subcommand("run", "Run every task in a configuration");
    run->add_option("--config", config_file, "Run configuration document")->required();
    run->add_option("--out", run_out, "Override the output directory");
    run->add_option("--label", run_label, "Override the run label");
    run->add_option("--parallelism", run_parallelism, "Override the worker count")->check(CLI::PositiveNumber);
    run->add_option("--kb", kb_switch, "Override kb_enabled")->check(CLI::IsMember({"on", "off"}));

    std::string trace_file, task_file, eval_mode = "subgoal_per_action", eval_out;
    auto* eval = app.add_subcommand("eval", "Re-evaluate a stored trace");
    eval->add_option("--trace", trace_file, "Trace file")->required();
    eval->add_option("--task", task_file, "Task spec the trace was recorded against")->required();
    eval->add_option("--cpa-mode", eval_mode, "subgoal_per_action or literal");
    eval->add_option("--out", eval_out, "Write the metrics document here instead of stdout");

    std::vector<std::string> report_runs;
    std::string report_format = "csv", report_out;
    auto* report = app.add_subcommand("report", "Aggregates and, for two runs, the improvement table");
    report->add_option("--runs", report_runs, "Run directories or aggregate files (without-KB first)")->required();
    report->add_option("--format", report_format, "csv or json");
    report->add_option("--out", report_out, "Output file");

    std::vector<std::string> corr_runs;
    std::string corr_format = "csv", corr_out;
    bool corr_per_run = false;
    auto* correlate = app.add_subcommand("correlate", "Pearson matrix over per-episode metrics");
    correlate->add_option("--runs", corr_runs, "Run directories")->required();
    correlate->add_option("--format", corr_format, "csv or json");
    correlate->add_option("--out", corr_out, "Output file");
    correlate->add_flag("--per-run", corr_per_run, "One matrix per run instead of a pooled one");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            auto templates = load_template_dir(templates_dir);
            auto tasks = synthesize(templates, json_util::read_file(bindings_file));
            for (const auto& task : tasks) save_task(fs::path(synth_out) / (task.task_id + ".json"), task);
            std::cout << "wrote " << tasks.size() << " task(s) to " << synth_out << "\n";
            return kExitOk;
        }
        if (*run) {
            RunConfig cfg = load_run_config(config_file);
            if (!run_out.empty()) cfg.output_dir = run_out;
            if (!run_label.empty()) cfg.label = run_label;
            if (run_parallelism > 0) cfg.parallelism = run_parallelism;
            if (!kb_switch.empty()) cfg.kb_enabled = kb_switch == "on";
            auto summary = run_benchmark(cfg);
            std::cout << "run " << cfg.label << ": " << summary.metrics.size() << " episode(s), CR "
                      << summary.aggregate.value("cr") << ", output " << summary.run_dir.string() << "\n";
            for (const auto& id : summary.failed_tasks) std::cerr << "kgce: agent error in task " << id << "\n";
            return summary.failed_tasks.empty() ? kExitOk : kExitIncomplete;
        }
        if (*eval) {
            auto task = std::make_shared<const TaskSpec>(load_task(task_file));
            auto stored = evaluate_trace(load_trace(trace_file), task, cpa_mode_or_throw(eval_mode));
            emit(json_util::dump(metrics_to_json(stored)), eval_out);
            return kExitOk;
        }
        if (*report) {
            auto format = parse_report_format(report_format);
            ReportData data;
            for (const auto& r : report_runs) data.aggregates.push_back(load_aggregate(r));
            if (data.aggregates.size() == 2) data.improvements = improvement(data.aggregates[0], data.aggregates[1]);
            emit(emit_report(data, format), report_out);
            return kExitOk;
        }
        if (*correlate) {
            auto format = parse_report_format(corr_format);
            std::string text;
            if (corr_per_run) {
                for (const auto& r : corr_runs) {
                    ReportData data;
                    data.correlation = pearson_matrix(load_run_metrics(r), all_metric_keys());
                    if (format == ReportFormat::csv) text += "# run " + fs::path(r).filename().string() + "\n";
                    text += emit_report(data, format);
                }
            } else {
                std::vector<MetricsReport> pooled;
                for (const auto& r : corr_runs) {
                    auto part = load_run_metrics(r);
                    pooled.insert(pooled.end(), part.begin(), part.end());
                }
                ReportData data;
                data.correlation = pearson_matrix(pooled, all_metric_keys());
                text = emit_report(data, format);
            }
            emit(text, corr_out);
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "kgce: " << e.code() << ": " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "kgce: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
