#include "kgce/analysis.hpp"

#include "kgce/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace kgce {

using nlohmann::json;

namespace {

std::size_t metric_slot(std::string_view key) {
    for (std::size_t i = 0; i < kMetricKeys.size(); ++i) {
        if (kMetricKeys[i] == key) return i;
    }
    throw std::out_of_range("unknown metric '" + std::string(key) + "'");
}

std::string full_precision(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", round_half_up(v, 2));
    return buf;
}

} // namespace

double RunAggregate::value(std::string_view key) const { return values[metric_slot(key)]; }

RunAggregate aggregate(const std::vector<MetricsReport>& reports, const std::string& label) {
    if (reports.empty()) throw EmptyRun("run '" + label + "' has no episodes");
    RunAggregate agg;
    agg.label = label;
    agg.episodes = static_cast<int>(reports.size());
    std::vector<double> column(reports.size());
    for (std::size_t m = 0; m < kMetricKeys.size(); ++m) {
        for (std::size_t i = 0; i < reports.size(); ++i) column[i] = metric_value(reports[i], kMetricKeys[m]);
        // Summing in sorted order makes the mean independent of input order.
        std::sort(column.begin(), column.end());
        double sum = std::accumulate(column.begin(), column.end(), 0.0);
        agg.values[m] = sum / static_cast<double>(reports.size());
    }
    return agg;
}

std::optional<double> improve_percent(double without, double with) {
    if (without == 0.0) return std::nullopt;
    return (with - without) / without * 100.0;
}

std::vector<ImprovementRow> improvement(const RunAggregate& without, const RunAggregate& with_kb) {
    std::vector<ImprovementRow> rows;
    for (std::size_t m = 0; m < kMetricKeys.size(); ++m) {
        double a = without.values[m];
        double b = with_kb.values[m];
        rows.push_back({std::string(kMetricLabels[m]), a, b, improve_percent(a, b)});
    }
    return rows;
}

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

std::string format_improvement(const std::optional<double>& pct) {
    if (!pct) return "NA";
    char buf[32];
    double r = round_half_up(*pct, 2);
    if (r == 0.0) r = 0.0;  // no "-0.00"
    std::snprintf(buf, sizeof buf, "%+.2f", r);
    return buf;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix pearson_matrix(const std::vector<MetricsReport>& reports, const std::vector<std::string>& metrics) {
    if (reports.size() < 2) {
        throw InsufficientData("correlation needs at least 2 episodes, got " + std::to_string(reports.size()));
    }
    std::vector<std::vector<double>> columns;
    for (const auto& key : metrics) {
        std::vector<double> col;
        col.reserve(reports.size());
        for (const auto& r : reports) col.push_back(metric_value(r, key));
        columns.push_back(std::move(col));
    }
    CorrelationMatrix out;
    out.metrics = metrics;
    const std::size_t k = metrics.size();
    out.r.assign(k, std::vector<std::optional<double>>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            std::optional<double> r;
            if (i == j) {
                if (pearson(columns[i], columns[i])) r = 1.0;
            } else {
                r = pearson(columns[i], columns[j]);
            }
            out.r[i][j] = r;
            out.r[j][i] = r;
        }
    }
    return out;
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "csv") return ReportFormat::csv;
    if (text == "json") return ReportFormat::json;
    throw UnsupportedFormat("unsupported report format '" + std::string(text) + "' (expected csv or json)");
}

namespace {

std::string label_for(const std::string& key) {
    for (std::size_t i = 0; i < kMetricKeys.size(); ++i) {
        if (kMetricKeys[i] == key) return std::string(kMetricLabels[i]);
    }
    return key;
}

std::string emit_csv(const ReportData& data) {
    std::ostringstream os;
    os << "# aggregates\n";
    os << "run,episodes,metric,value,display_pct\n";
    for (const auto& agg : data.aggregates) {
        for (std::size_t m = 0; m < kMetricKeys.size(); ++m) {
            os << agg.label << "," << agg.episodes << "," << kMetricLabels[m] << ","
               << full_precision(agg.values[m]) << "," << fixed2(agg.values[m] * 100.0) << "\n";
        }
    }
    os << "\n# improvement\n";
    os << "metric,without,with,improve_pct,improve_display\n";
    for (const auto& row : data.improvements) {
        os << row.metric << "," << full_precision(row.without) << "," << full_precision(row.with) << ","
           << (row.improve_pct ? full_precision(*row.improve_pct) : "NA") << ","
           << format_improvement(row.improve_pct) << "\n";
    }
    if (data.correlation) {
        const auto& c = *data.correlation;
        os << "\n# correlation\n";
        os << "metric";
        for (const auto& m : c.metrics) os << "," << label_for(m);
        os << "\n";
        for (std::size_t i = 0; i < c.metrics.size(); ++i) {
            os << label_for(c.metrics[i]);
            for (const auto& v : c.r[i]) os << "," << (v ? full_precision(*v) : "NA");
            os << "\n";
        }
    }
    return os.str();
}

json emit_json(const ReportData& data) {
    json aggregates = json::array();
    for (const auto& agg : data.aggregates) {
        json values = json::object();
        json display = json::object();
        for (std::size_t m = 0; m < kMetricKeys.size(); ++m) {
            values[std::string(kMetricKeys[m])] = agg.values[m];
            display[std::string(kMetricKeys[m])] = fixed2(agg.values[m] * 100.0);
        }
        aggregates.push_back({{"run", agg.label}, {"episodes", agg.episodes}, {"metrics", values}, {"display_pct", display}});
    }
    json improvements = json::array();
    for (const auto& row : data.improvements) {
        improvements.push_back({{"metric", row.metric},
                                {"without", row.without},
                                {"with", row.with},
                                {"improve_pct", row.improve_pct ? json(*row.improve_pct) : json(nullptr)},
                                {"improve_display", format_improvement(row.improve_pct)}});
    }
    json doc = {{"schema", std::string(kReportSchema)}, {"aggregates", aggregates}, {"improvements", improvements}};
    if (data.correlation) {
        json matrix = json::array();
        for (const auto& row : data.correlation->r) {
            json jr = json::array();
            for (const auto& v : row) jr.push_back(v ? json(*v) : json(nullptr));
            matrix.push_back(jr);
        }
        doc["correlation"] = {{"metrics", data.correlation->metrics}, {"matrix", matrix}};
    }
    return doc;
}

} // namespace

std::string emit_report(const ReportData& data, ReportFormat format) {
    switch (format) {
    case ReportFormat::csv: return emit_csv(data);
    case ReportFormat::json: return json_util::dump(emit_json(data));
    }
    throw UnsupportedFormat("unsupported report format");
}

ReportData report_from_json(const json& doc) {
    json_util::expect_schema(doc, kReportSchema);
    ReportData out;
    const json& aggs = json_util::optional_array(doc, "aggregates", "$");
    for (std::size_t i = 0; i < aggs.size(); ++i) {
        const auto path = json_util::index("$.aggregates", i);
        RunAggregate agg;
        agg.label = json_util::require_string(aggs[i], "run", path);
        agg.episodes = static_cast<int>(json_util::require_int(aggs[i], "episodes", path));
        const json& values = json_util::require(aggs[i], "metrics", path);
        for (std::size_t m = 0; m < kMetricKeys.size(); ++m) {
            agg.values[m] = json_util::require_number(values, kMetricKeys[m], json_util::child(path, "metrics"));
        }
        out.aggregates.push_back(std::move(agg));
    }
    const json& rows = json_util::optional_array(doc, "improvements", "$");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto path = json_util::index("$.improvements", i);
        ImprovementRow row;
        row.metric = json_util::require_string(rows[i], "metric", path);
        row.without = json_util::require_number(rows[i], "without", path);
        row.with = json_util::require_number(rows[i], "with", path);
        const json& pct = json_util::require(rows[i], "improve_pct", path);
        if (!pct.is_null()) row.improve_pct = pct.get<double>();
        out.improvements.push_back(std::move(row));
    }
    if (doc.contains("correlation")) {
        const json& c = doc.at("correlation");
        CorrelationMatrix m;
        for (const auto& name : json_util::require_array(c, "metrics", "$.correlation")) {
            m.metrics.push_back(name.get<std::string>());
        }
        for (const auto& row : json_util::require_array(c, "matrix", "$.correlation")) {
            std::vector<std::optional<double>> r;
            for (const auto& v : row) r.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
            m.r.push_back(std::move(r));
        }
        out.correlation = std::move(m);
    }
    return out;
}

} // namespace kgce
