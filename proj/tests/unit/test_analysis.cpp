#include "eva/analysis.hpp"

#include "../support/paths.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eva;

namespace {

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DecisionRecord rec(std::optional<AlarmChoice> a, std::optional<ExitLabel> e, double pre, double total) {
    DecisionRecord r;
    r.alarm_response = a;
    r.exit_used = e;
    r.pre_evac_time_s = pre;
    r.total_evac_time_s = total;
    return r;
}

} // namespace

TEST_CASE("sample report matches the golden files") {
    const auto recs = load_records(testpaths::repo("data/sample"));
    const auto tables = tabulate(recs);
    const auto times = time_summary(recs);
    CHECK(report_text(tables, times) == slurp(testpaths::repo("tests/golden/sample_report.txt")));
    CHECK(report_csv(tables, times) == slurp(testpaths::repo("tests/golden/sample_report.csv")));
}

TEST_CASE("sample marginals are the published counts") {
    const auto t = tabulate(load_records(testpaths::repo("data/sample")));
    CHECK(t.n == 20);
    const std::array<YesNo, 5> t1{{{13, 7}, {9, 11}, {12, 8}, {1, 19}, {16, 4}}};
    CHECK(t.table1 == t1);
    CHECK(t.table2 == std::array<std::size_t, 4>{1, 1, 8, 9});
    CHECK(t.unanswered == 1);
    CHECK(t.table3 == std::array<std::size_t, 4>{4, 10, 1, 5});
    CHECK(t.failed_egress == 0);
}

TEST_CASE("records csv and logs give the same tables") {
    const auto dir = testpaths::scratch("analysis");
    const auto recs = load_records(testpaths::repo("data/sample"));
    {
        std::ofstream out(dir / "records.csv", std::ios::binary);
        out << records_to_csv(recs);
    }
    CHECK(load_records(dir.string()) == recs);
    CHECK(load_records((dir / "records.csv").string()) == recs);
    std::filesystem::create_directories(dir / "empty");
    CHECK_THROWS_AS(load_records((dir / "empty").string()), AnalysisError);
    CHECK_THROWS(load_records((dir / "nope").string()));
}

TEST_CASE("describe") {
    const std::vector<double> odd{5, 1, 3};
    const Stats s = describe(odd);
    CHECK(s.mean == 3.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);
    CHECK(s.median == 3.0);
    const std::vector<double> even{4, 1, 3, 2};
    CHECK(describe(even).median == 2.0); // lower middle
    CHECK_THROWS_AS(describe(std::vector<double>{}), AnalysisError);
}

TEST_CASE("tabulate counts dismissals and failed egress") {
    const std::vector<DecisionRecord> r{rec(AlarmChoice::A, ExitLabel::D, 1, 2), rec(std::nullopt, ExitLabel::D, 1, 2),
                                        rec(AlarmChoice::C, std::nullopt, 1, 2)};
    const auto t = tabulate(r);
    CHECK(t.table2 == std::array<std::size_t, 4>{1, 0, 1, 0});
    CHECK(t.unanswered == 1);
    CHECK(t.table3 == std::array<std::size_t, 4>{0, 0, 0, 2});
    CHECK(t.failed_egress == 1);
    FrequencyTables sum = t;
    sum += t;
    CHECK(sum.n == 6);
    CHECK(sum.unanswered == 2);

    const auto times = time_summary(r);
    CHECK_FALSE(times.caveat.empty());
    const std::string text = report_text(t, times);
    CHECK(text.find("no answer recorded") != std::string::npos);
    CHECK(report_csv(t, times).find("table2,none,count,1") != std::string::npos);
}
