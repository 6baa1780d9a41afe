#pragma once

#include "eva/telemetry.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eva {

struct YesNo {
    std::size_t yes = 0;
    std::size_t no = 0;
    bool operator==(const YesNo &) const = default;
};

/// Marginal counts laid out like the published result tables.
struct FrequencyTables {
    /// Rows: gamer, fire training, drill experience, real fire, followed signage.
    std::array<YesNo, 5> table1{};
    /// Counts over answers a..d.
    std::array<std::size_t, 4> table2{};
    /// Records whose alarm question was dismissed without a choice.
    std::size_t unanswered = 0;
    /// Counts over exits A..D.
    std::array<std::size_t, 4> table3{};
    /// Records without an exit (artificial agents that never got out).
    std::size_t failed_egress = 0;
    std::size_t n = 0;

    bool operator==(const FrequencyTables &) const = default;
    FrequencyTables &operator+=(const FrequencyTables &o);
};

class AnalysisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

FrequencyTables tabulate(std::span<const DecisionRecord> records);

struct Stats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    /// Lower-middle element for even counts.
    double median = 0.0;
};

struct TimeSummary {
    Stats pre_evac;
    Stats total_evac;
    /// Always present; absolute times are not meaningful on their own.
    std::string caveat;
};

Stats describe(std::span<const double> values);
TimeSummary time_summary(std::span<const DecisionRecord> records);

/// Plain-text report with the three tables and the time summary.
std::string report_text(const FrequencyTables &tables, const TimeSummary &times);
/// Long-format CSV: table,row,column,value.
std::string report_csv(const FrequencyTables &tables, const TimeSummary &times);

/// Loads records from a directory (or single file). Directories with any
/// .evlog file are summarized from those logs; otherwise every .csv records
/// file is read. Files are visited in name order.
std::vector<DecisionRecord> load_records(const std::string &path);

} // namespace eva
