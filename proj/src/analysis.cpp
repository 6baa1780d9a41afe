#include "eva/analysis.hpp"
#include "eva/locale.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace eva {

namespace fs = std::filesystem;

FrequencyTables &FrequencyTables::operator+=(const FrequencyTables &o) {
    for (std::size_t i = 0; i < table1.size(); ++i) {
        table1[i].yes += o.table1[i].yes;
        table1[i].no += o.table1[i].no;
    }
    for (std::size_t i = 0; i < 4; ++i) {
        table2[i] += o.table2[i];
        table3[i] += o.table3[i];
    }
    unanswered += o.unanswered;
    failed_egress += o.failed_egress;
    n += o.n;
    return *this;
}

FrequencyTables tabulate(std::span<const DecisionRecord> records) {
    if (records.empty())
        throw AnalysisError("tabulate needs at least one record");
    FrequencyTables t;
    for (const auto &r : records) {
        const bool flags[5] = {r.is_gamer, r.fire_training, r.drill_experience, r.real_fire_experience,
                               r.followed_signage};
        for (std::size_t i = 0; i < 5; ++i)
            (flags[i] ? t.table1[i].yes : t.table1[i].no) += 1;
        if (r.alarm_response)
            t.table2[index_of(*r.alarm_response)] += 1;
        else
            t.unanswered += 1;
        if (r.exit_used)
            t.table3[index_of(*r.exit_used)] += 1;
        else
            t.failed_egress += 1;
        ++t.n;
    }
    return t;
}

Stats describe(std::span<const double> values) {
    if (values.empty())
        throw AnalysisError("cannot describe an empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::ranges::sort(v);
    Stats s;
    s.min = v.front();
    s.max = v.back();
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.median = v[(v.size() - 1) / 2];
    return s;
}

TimeSummary time_summary(std::span<const DecisionRecord> records) {
    if (records.empty())
        throw AnalysisError("time_summary needs at least one record");
    std::vector<double> pre;
    std::vector<double> total;
    for (const auto &r : records) {
        pre.push_back(r.pre_evac_time_s);
        total.push_back(r.total_evac_time_s);
    }
    return {describe(pre), describe(total), locale().time_caveat};
}

namespace {

std::string row(const std::string &label, const std::string &cells) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-48s%s\n", label.c_str(), cells.c_str());
    return buf;
}

std::string count(std::size_t v, int width = 5) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%*zu", width, v);
    return buf;
}

std::string seconds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%9.2f", v);
    return buf;
}

} // namespace

std::string report_text(const FrequencyTables &t, const TimeSummary &times) {
    const auto &text = locale();
    std::string out;
    out += "Table 1 - Population sample (n = " + std::to_string(t.n) + ")\n";
    out += row("", "  YES   NO");
    for (std::size_t i = 0; i < 5; ++i)
        out += row(text.post_questions[i], count(t.table1[i].yes) + count(t.table1[i].no));
    out += "\nTable 2 - Answers to initial question\n";
    for (AlarmChoice c : kAlarmChoices)
        out += row(to_string(c) + ") " + text.alarm_options[index_of(c)], count(t.table2[index_of(c)]));
    if (t.unanswered > 0)
        out += row("no answer recorded", count(t.unanswered));
    out += "\nTable 3 - Exits used by the players\n";
    for (ExitLabel l : kExitLabels)
        out += row(text.exit_names[index_of(l)], count(t.table3[index_of(l)]));
    if (t.failed_egress > 0)
        out += row("no exit reached", count(t.failed_egress));
    out += "\nTimes from the alarm (s)" + std::string(24, ' ') + "     mean      min      max   median\n";
    auto stats_row = [&](const char *label, const Stats &s) {
        out += row(label, seconds(s.mean) + seconds(s.min) + seconds(s.max) + seconds(s.median));
    };
    stats_row("pre-evacuation", times.pre_evac);
    stats_row("total evacuation", times.total_evac);
    out += times.caveat + "\n";
    return out;
}

std::string report_csv(const FrequencyTables &t, const TimeSummary &times) {
    const auto &text = locale();
    std::ostringstream out;
    auto quoted = [](const std::string &s) {
        std::string q = "\"";
        for (char c : s)
            q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    out << "table,row,column,value\n";
    for (std::size_t i = 0; i < 5; ++i) {
        out << "table1," << quoted(text.post_questions[i]) << ",yes," << t.table1[i].yes << "\n";
        out << "table1," << quoted(text.post_questions[i]) << ",no," << t.table1[i].no << "\n";
    }
    for (AlarmChoice c : kAlarmChoices)
        out << "table2," << to_string(c) << ",count," << t.table2[index_of(c)] << "\n";
    out << "table2,none,count," << t.unanswered << "\n";
    for (ExitLabel l : kExitLabels)
        out << "table3," << to_string(l) << ",count," << t.table3[index_of(l)] << "\n";
    out << "table3,none,count," << t.failed_egress << "\n";
    out << "n,all,count," << t.n << "\n";
    auto stats = [&](const char *name, const Stats &s) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "times,%s,mean,%.6f\ntimes,%s,min,%.6f\ntimes,%s,max,%.6f\ntimes,%s,median,%.6f\n",
                      name, s.mean, name, s.min, name, s.max, name, s.median);
        out << buf;
    };
    stats("pre_evac_time_s", times.pre_evac);
    stats("total_evac_time_s", times.total_evac);
    out << "caveat,all,text," << quoted(times.caveat) << "\n";
    return out.str();
}

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<DecisionRecord> records_from_file(const fs::path &p) {
    if (p.extension() == ".evlog")
        return {summarize(read_log_file(p.string()))};
    if (p.extension() == ".csv")
        return records_from_csv(slurp(p));
    throw AnalysisError("unsupported input file " + p.string() + " (expected .evlog or .csv)");
}

} // namespace

std::vector<DecisionRecord> load_records(const std::string &path) {
    const fs::path root(path);
    if (!fs::exists(root))
        throw std::runtime_error("no such file or directory: " + path);
    if (!fs::is_directory(root))
        return records_from_file(root);

    std::vector<fs::path> logs;
    std::vector<fs::path> csvs;
    for (const auto &entry : fs::directory_iterator(root)) {
        if (!entry.is_regular_file())
            continue;
        if (entry.path().extension() == ".evlog")
            logs.push_back(entry.path());
        else if (entry.path().extension() == ".csv")
            csvs.push_back(entry.path());
    }
    auto &chosen = logs.empty() ? csvs : logs;
    std::ranges::sort(chosen);
    std::vector<DecisionRecord> out;
    for (const auto &p : chosen) {
        auto part = records_from_file(p);
        out.insert(out.end(), part.begin(), part.end());
    }
    if (out.empty())
        throw AnalysisError("no .evlog or .csv records found in " + path);
    return out;
}

} // namespace eva
