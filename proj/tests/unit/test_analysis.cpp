#include "doctest.h"

#include "kgce/analysis.hpp"
#include "kgce/error.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace kgce;
using kgce::testing::Rng;

namespace {

MetricsReport with_cr(double cr, bool rms = false) {
    MetricsReport r;
    r.cr = cr;
    r.rms = rms;
    return r;
}

std::vector<MetricsReport> random_reports(Rng& rng, int n) {
    std::vector<MetricsReport> out;
    for (int i = 0; i < n; ++i) out.push_back(evaluate_episode(kgce::testing::random_episode(rng)));
    return out;
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("aggregate takes means and the RMS fraction") {
    auto agg = aggregate({with_cr(0.5, true), with_cr(1.0)}, "r");
    CHECK(agg.value("cr") == 0.75);
    CHECK(agg.value("rms") == 0.5);
    CHECK(agg.episodes == 2);
    CHECK_THROWS_AS(aggregate({}, "empty"), EmptyRun);
    CHECK_THROWS_AS(agg.value("speed"), std::out_of_range);
}

TEST_CASE("a single episode aggregates to itself") {
    Rng rng(51);
    auto reports = random_reports(rng, 1);
    auto agg = aggregate(reports, "one");
    for (auto key : kMetricKeys) CHECK(agg.value(key) == metric_value(reports[0], key));
}

TEST_CASE("aggregate over 104 episodes matches a streaming recount and ignores order") {
    Rng rng(52);
    auto reports = random_reports(rng, 104);
    auto agg = aggregate(reports, "run");
    for (auto key : kMetricKeys) {
        // Welford-style running mean as the independent second pass.
        double mean = 0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            mean += (metric_value(reports[i], key) - mean) / static_cast<double>(i + 1);
        }
        CHECK(agg.value(key) == doctest::Approx(mean).epsilon(1e-12));
        CHECK(agg.value(key) >= 0.0);
        CHECK(agg.value(key) <= 1.0);
    }
    auto shuffled = reports;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(aggregate(shuffled, "run") == agg);
}

TEST_CASE("improvement follows the relative change formula") {
    CHECK(*improve_percent(60.02, 75.26) == doctest::Approx(25.39).epsilon(0.0008));
    CHECK(*improve_percent(5.82, 12.09) == doctest::Approx(107.73).epsilon(0.0002));
    CHECK_FALSE(improve_percent(0.0, 0.3));
    CHECK(format_improvement(std::nullopt) == "NA");
    CHECK(format_improvement(-20.265) == "-20.27");
    CHECK(format_improvement(0.001) == "+0.00");
    CHECK(format_improvement(-0.001) == "+0.00");

    Rng rng(53);
    for (int i = 0; i < 500; ++i) {
        double a = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
        double b = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        auto up = *improve_percent(a, b);
        CHECK((up > 0) == (b > a));
        CHECK(up == (b - a) / a * 100.0);
    }
}

TEST_CASE("rounding is half away from zero") {
    CHECK(round_half_up(2.5, 0) == 3.0);
    CHECK(round_half_up(-2.5, 0) == -3.0);
    CHECK(round_half_up(1.234, 2) == doctest::Approx(1.23));
}

TEST_CASE("Pearson closed forms") {
    std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{3, 2, 1};
    CHECK(std::abs(*pearson(a, b) - 1.0) < 1e-12);
    CHECK(std::abs(*pearson(a, c) + 1.0) < 1e-12);
    std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
    CHECK(std::abs(*pearson(x, y) - 0.8) < 1e-12);
    std::vector<double> flat{2, 2, 2};
    CHECK_FALSE(pearson(a, flat));
    std::vector<double> one{1};
    CHECK_FALSE(pearson(one, one));
}

TEST_CASE("matrix is symmetric with unit diagonal and n/a for constant columns") {
    Rng rng(54);
    auto reports = random_reports(rng, 60);
    for (auto& r : reports) r.oor_rate = 0.25;
    std::vector<std::string> keys(kMetricKeys.begin(), kMetricKeys.end());
    auto m = pearson_matrix(reports, keys);
    REQUIRE(m.r.size() == keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (std::size_t j = 0; j < keys.size(); ++j) {
            CHECK(m.r[i][j] == m.r[j][i]);
            if (m.r[i][j]) CHECK(std::abs(*m.r[i][j]) <= 1.0);
        }
        if (keys[i] == "oor") {
            CHECK_FALSE(m.r[i][i]);
        } else {
            CHECK(m.r[i][i] == 1.0);
        }
    }
    CHECK_THROWS_AS(pearson_matrix({reports[0]}, keys), InsufficientData);
}

TEST_CASE("reports: csv layout, json round trip, unknown formats") {
    auto without = aggregate({with_cr(0.5)}, "without");
    auto with = aggregate({with_cr(0.75)}, "with");
    ReportData data{{without, with}, improvement(without, with), std::nullopt};

    auto csv = emit_report(data, ReportFormat::csv);
    auto improve_at = csv.find("# improvement\nmetric,without,with,improve_pct,improve_display\n");
    REQUIRE(improve_at != std::string::npos);
    CHECK(csv.find("CR,0.5,0.75,50,+50.00\n") != std::string::npos);
    CHECK(csv.find("CPA,0,0,NA,NA\n") != std::string::npos);
    auto rows = std::count(csv.begin() + static_cast<long>(improve_at), csv.end(), '\n');
    CHECK(rows == 2 + 8);

    auto json_text = emit_report(data, ReportFormat::json);
    auto back = report_from_json(nlohmann::json::parse(json_text));
    CHECK(back.aggregates == data.aggregates);
    CHECK(back.improvements == data.improvements);

    ReportData empty;
    auto header_only = emit_report(empty, ReportFormat::csv);
    CHECK(header_only.find("metric,without,with,improve_pct,improve_display\n") != std::string::npos);

    CHECK_THROWS_AS(parse_report_format("xlsx"), UnsupportedFormat);
}

}
