#include <algorithm>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "bayescrr/report.hpp"
#include "fixtures.hpp"

using namespace bayescrr;

TEST(RollingRun, MaturityOneDayAfterFirstEvaluation) {
    const auto series = fixture::random_walk_series(80, 1);
    const auto config = fixture::fast_config(series, 60, 1, 450.0);
    const auto report = rolling_run(series, config);
    ASSERT_EQ(report.entries.size(), 1u);
    EXPECT_EQ(report.entries[0].periods, 1);
    EXPECT_EQ(report.entries[0].date, series.dates[60]);
    EXPECT_EQ(report.entries[0].methods.size(), all_methods.size());
}

TEST(RollingRun, EntriesCoverDatesBeforeMaturity) {
    const auto series = fixture::random_walk_series(120, 2);
    const auto config = fixture::fast_config(series, 60, 15, 450.0);
    const auto report = rolling_run(series, config);
    ASSERT_EQ(report.entries.size(), 15u);
    std::set<Date> input(series.dates.begin(), series.dates.end());
    for (std::size_t j = 0; j < report.entries.size(); ++j) {
        const auto& e = report.entries[j];
        EXPECT_TRUE(input.count(e.date));
        EXPECT_LT(e.date, config.maturity);
        EXPECT_EQ(e.periods, 15 - static_cast<int>(j));
        EXPECT_NEAR(e.r_f, per_period_rate(0.03), 0.0);
        for (const auto& m : e.methods) {
            EXPECT_LE(m.summary.lower, m.summary.median);
            EXPECT_LE(m.summary.median, m.summary.upper);
            EXPECT_EQ(m.summary.width, m.summary.upper - m.summary.lower);
        }
    }
}

TEST(RollingRun, FirstDateSkipsEarlierDays) {
    const auto series = fixture::random_walk_series(100, 3);
    auto config = fixture::fast_config(series, 60, 10, 450.0);
    config.methods = {Method::sm};
    config.first_date = series.dates[65];
    const auto report = rolling_run(series, config);
    ASSERT_EQ(report.entries.size(), 5u);
    EXPECT_EQ(report.entries.front().date, series.dates[65]);
}

TEST(RollingRun, RateColumnOverridesConstant) {
    auto series = fixture::random_walk_series(70, 4);
    series.has_rate_column = true;
    series.rate[60] = 0.05;
    auto config = fixture::fast_config(series, 60, 2, 450.0);
    config.methods = {Method::sm};
    const auto report = rolling_run(series, config);
    EXPECT_EQ(report.entries[0].r_f, per_period_rate(0.05));
    EXPECT_EQ(report.entries[1].r_f, per_period_rate(0.03));
}

TEST(RollingRun, IdenticalAcrossRunsAndWorkerCounts) {
    const auto series = fixture::random_walk_series(90, 5);
    auto config = fixture::fast_config(series, 60, 6, 450.0);
    config.keep_samples = true;
    const auto dir_a = fixture::fresh_dir("roll_a"), dir_b = fixture::fresh_dir("roll_b"),
               dir_c = fixture::fresh_dir("roll_c");
    emit_report(rolling_run(series, config), dir_a);
    emit_report(rolling_run(series, config), dir_b);
    config.workers = 4;
    emit_report(rolling_run(series, config), dir_c);
    const auto a = fixture::snapshot(dir_a);
    EXPECT_EQ(a, fixture::snapshot(dir_b));
    EXPECT_EQ(a, fixture::snapshot(dir_c));
    EXPECT_TRUE(a.count("samples/theta_" + series.dates[60].str() + ".csv"));
    config.seed = 43;
    const auto dir_d = fixture::fresh_dir("roll_d");
    emit_report(rolling_run(series, config), dir_d);
    EXPECT_NE(a, fixture::snapshot(dir_d));
}

TEST(RollingRun, FlatWindowsBecomeGaps) {
    auto series = fixture::random_walk_series(60, 6);
    // The first evaluation window sees only unchanged closes.
    for (std::size_t i = 0; i <= 30; ++i) series.closes[i] = 450.0;
    auto config = fixture::fast_config(series, 30, 10, 450.0);
    config.annual_rate = 0.0;
    const auto report = rolling_run(series, config);
    ASSERT_TRUE(report.entries[0].gap);
    EXPECT_FALSE(report.entries[0].gap_reason.empty());
    EXPECT_FALSE(report.entries.back().gap);
    EXPECT_FALSE(report.warnings.empty());

    const auto dir = fixture::fresh_dir("roll_gaps");
    emit_report(report, dir);
    std::ifstream gaps(dir / "gaps.csv");
    std::string header, first;
    std::getline(gaps, header);
    std::getline(gaps, first);
    EXPECT_EQ(header, "date,reason");
    EXPECT_EQ(first.substr(0, 10), series.dates[30].str());
    std::ifstream sm(dir / "sm_series.csv");
    const auto rows = read_series_rows(sm);
    std::size_t non_gap = 0;
    for (const auto& e : report.entries) non_gap += !e.gap;
    EXPECT_EQ(rows.size(), non_gap);
}

TEST(RollingRun, RiskPremiumFromMarketColumn) {
    auto series = fixture::random_walk_series(70, 7);
    series.has_market_column = true;
    for (std::size_t i = 60; i < 70; ++i) series.market_option_price[i] = 12.5 + 0.1 * static_cast<double>(i - 60);
    series.market_option_price[61].reset();
    auto config = fixture::fast_config(series, 60, 4, 450.0);
    config.methods = {Method::expected_xi, Method::bm};
    const auto report = rolling_run(series, config);
    for (const auto& e : report.entries)
        for (const auto& m : e.methods) {
            if (!e.market) {
                EXPECT_FALSE(m.premium_mean.has_value());
                continue;
            }
            EXPECT_EQ(*m.premium_mean, *e.market - m.summary.mean);
            EXPECT_EQ(*m.premium_upper, *e.market - m.summary.upper);
        }
    EXPECT_FALSE(report.entries[1].market.has_value());
}

TEST(EmitReport, FilesReproduceInMemorySummaries) {
    auto series = fixture::random_walk_series(80, 8);
    series.has_market_column = true;
    for (std::size_t i = 0; i < series.size(); ++i) series.market_option_price[i] = 10.0;
    const auto config = fixture::fast_config(series, 60, 8, 455.0);
    const auto report = rolling_run(series, config);
    const auto dir = fixture::fresh_dir("emit_roundtrip");
    emit_report(report, dir);
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
        std::ifstream in(dir / (std::string(to_string(report.methods[k])) + "_series.csv"));
        const auto rows = read_series_rows(in);
        ASSERT_EQ(rows.size(), report.entries.size());
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const auto& e = report.entries[j];
            const auto& s = e.methods[k].summary;
            EXPECT_EQ(rows[j].date, e.date);
            EXPECT_EQ(rows[j].periods, e.periods);
            EXPECT_EQ(rows[j].spot, e.spot);
            EXPECT_EQ(rows[j].mean, s.mean);
            EXPECT_EQ(rows[j].median, s.median);
            EXPECT_EQ(rows[j].lower, s.lower);
            EXPECT_EQ(rows[j].upper, s.upper);
            EXPECT_EQ(rows[j].width, s.width);
            EXPECT_EQ(rows[j].market, e.market);
            EXPECT_EQ(rows[j].premium_mean, e.methods[k].premium_mean);
            EXPECT_EQ(rows[j].premium_upper, e.methods[k].premium_upper);
        }
    }
    std::ifstream summary(dir / "summary.csv");
    const auto rows = read_summary_csv(summary);
    const auto averages = average_over_dates(report);
    ASSERT_EQ(rows.size(), report.methods.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k].method, averages[k].method);
        EXPECT_EQ(rows[k].dates, averages[k].dates);
        EXPECT_EQ(rows[k].mean, averages[k].mean);
        EXPECT_EQ(rows[k].median, averages[k].median);
        EXPECT_EQ(rows[k].width, averages[k].width);
    }
    std::ifstream json_in(dir / "summary.json");
    const auto j = nlohmann::json::parse(json_in);
    EXPECT_EQ(j["methods"].size(), report.methods.size());
    EXPECT_EQ(j["methods"][0]["width"].get<double>(), averages[0].width);
}

TEST(EmitReport, EmptyMethodSetGivesHeaderOnlySummary) {
    const auto series = fixture::random_walk_series(70, 9);
    auto config = fixture::fast_config(series, 60, 3, 450.0);
    config.methods.clear();
    const auto report = rolling_run(series, config);
    const auto dir = fixture::fresh_dir("emit_empty");
    emit_report(report, dir);
    EXPECT_EQ(fixture::read_file(dir / "summary.csv"), "method,dates,mean,median,width\n");
}

TEST(EmitReport, Errors) {
    const auto series = fixture::random_walk_series(70, 10);
    auto config = fixture::fast_config(series, 60, 2, 450.0);
    config.methods = {Method::sm};
    const auto report = rolling_run(series, config);
    EXPECT_THROW(emit_report(report, "/dev/null/report"), validation_error);
    EXPECT_THROW(emit_report(RollingReport{}, fixture::fresh_dir("emit_none")), validation_error);
}

TEST(RollingRun, ConfigurationErrors) {
    const auto series = fixture::random_walk_series(70, 11);
    auto config = fixture::fast_config(series, 60, 3, 450.0);
    auto bad = config;
    bad.window = 1;
    EXPECT_THROW(rolling_run(series, bad), validation_error);
    bad = config;
    bad.strike = 0.0;
    EXPECT_THROW(rolling_run(series, bad), validation_error);
    bad = config;
    bad.window = 80;
    EXPECT_THROW(rolling_run(series, bad), validation_error);
    bad = config;
    bad.maturity = series.dates[60];
    EXPECT_THROW(rolling_run(series, bad), validation_error);
}
