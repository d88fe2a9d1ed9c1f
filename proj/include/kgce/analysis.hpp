#pragma once

#include "kgce/dual_graph_eval.hpp"
#include "kgce/json_util.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgce {

inline constexpr std::string_view kReportSchema = "kgce-report/1";

/// Run-level means. `values` follows kMetricKeys; the rms slot holds the
/// fraction of episodes that exhausted their step budget.
struct RunAggregate {
    std::string label;
    int episodes = 0;
    std::array<double, 8> values{};

    double value(std::string_view key) const;
    bool operator==(const RunAggregate&) const = default;
};

/// Means over `reports`, independent of their order. Throws EmptyRun.
RunAggregate aggregate(const std::vector<MetricsReport>& reports, const std::string& label);

struct ImprovementRow {
    std::string metric;
    double without = 0;
    double with = 0;
    /// Unrounded percent change; nullopt when the baseline is zero.
    std::optional<double> improve_pct;

    bool operator==(const ImprovementRow&) const = default;
};

/// (with - without) / without * 100, or nullopt for a zero baseline.
std::optional<double> improve_percent(double without, double with);

/// One row per metric in reporting order.
std::vector<ImprovementRow> improvement(const RunAggregate& without, const RunAggregate& with_kb);

/// Round half away from zero at `decimals` places (display only).
double round_half_up(double value, int decimals);

/// "+25.39", "-20.27", or "NA".
std::string format_improvement(const std::optional<double>& pct);

/// Pearson r; nullopt when either column has zero variance or sizes differ
/// or fewer than two samples are given.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
    std::vector<std::string> metrics;
    /// Row-major, metrics.size() squared; nullopt = not applicable.
    std::vector<std::vector<std::optional<double>>> r;
};

/// Throws InsufficientData for fewer than two reports; unknown metric keys
/// throw std::out_of_range.
CorrelationMatrix pearson_matrix(const std::vector<MetricsReport>& reports, const std::vector<std::string>& metrics);

enum class ReportFormat { csv, json };
/// Throws UnsupportedFormat.
ReportFormat parse_report_format(std::string_view text);

struct ReportData {
    std::vector<RunAggregate> aggregates;
    std::vector<ImprovementRow> improvements;
    std::optional<CorrelationMatrix> correlation;
};

std::string emit_report(const ReportData& data, ReportFormat format);
ReportData report_from_json(const nlohmann::json& doc);

} // namespace kgce
