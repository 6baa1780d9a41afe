#pragma once

#include "eva/labels.hpp"
#include "eva/log_entry.hpp"

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eva {

/// Answers to the post-game questionnaire.
struct SubjectMeta {
    bool is_gamer = false;
    bool fire_training = false;
    bool drill_experience = false;
    bool real_fire_experience = false;
    bool followed_signage = false;

    bool operator==(const SubjectMeta &) const = default;
};

inline constexpr int kLogVersion = 1;

struct SessionLog {
    int version = kLogVersion;
    std::string session_id;
    std::string subject_id;
    std::string plan_digest;
    std::optional<SubjectMeta> subject_meta;
    std::vector<LogEntry> events;

    /// In-place append with the same checks as eva::append.
    void push(LogEntry entry);

    bool operator==(const SessionLog &) const = default;
};

class TelemetryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Returns `log` extended by `entry`. Throws TelemetryError on a time
/// regression, a second session_start, or anything after session_end.
SessionLog append(const SessionLog &log, LogEntry entry);

class LogDecodeError : public std::runtime_error {
public:
    LogDecodeError(std::size_t line, const std::string &what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

enum class DecodeMode {
    Strict,
    /// Drop an unparseable final line, as left behind by a crashed writer.
    Lenient,
};

/// Header line, then one JSON object per event, each newline-terminated.
std::string encode(const SessionLog &log);
SessionLog decode(std::string_view bytes, DecodeMode mode = DecodeMode::Strict);

SessionLog read_log_file(const std::string &path, DecodeMode mode = DecodeMode::Strict);
void write_log_file(const std::string &path, const SessionLog &log);

/// Per-subject summary of one drill run.
struct DecisionRecord {
    std::string subject_id;
    /// Empty when the alarm question was dismissed unanswered.
    std::optional<AlarmChoice> alarm_response;
    bool rescued = false;
    /// Empty for an agent that never got out.
    std::optional<ExitLabel> exit_used;
    double pre_evac_time_s = 0.0;
    std::optional<double> rescue_time_s;
    double total_evac_time_s = 0.0;
    bool followed_signage = false;
    bool is_gamer = false;
    bool fire_training = false;
    bool drill_experience = false;
    bool real_fire_experience = false;

    bool operator==(const DecisionRecord &) const = default;
};

class SummaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reduces a log to its DecisionRecord. Times are measured from the alarm.
/// Throws SummaryError listing every missing piece (e.g. "missing AnswerGiven").
DecisionRecord summarize(const SessionLog &log);

/// CSV column order of DecisionRecord exports.
inline constexpr std::array<const char *, 12> kRecordColumns{
    "subject_id",       "alarm_response",    "rescued",          "exit_used",
    "pre_evac_time_s",  "rescue_time_s",     "total_evac_time_s", "followed_signage",
    "is_gamer",         "fire_training",     "drill_experience", "real_fire_experience"};

std::string records_to_csv(std::span<const DecisionRecord> records);
/// Same columns as the CSV; absent values become null.
nlohmann::json record_to_json(const DecisionRecord &r);
std::vector<DecisionRecord> records_from_csv(std::string_view text);

} // namespace eva
