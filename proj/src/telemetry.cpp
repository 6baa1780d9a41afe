#include "eva/telemetry.hpp"
#include "eva/scenario.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eva {

using nlohmann::json;
using nlohmann::ordered_json;

void SessionLog::push(LogEntry entry) {
    if (!std::isfinite(entry.t))
        throw TelemetryError("log entry time must be finite");
    if (!events.empty()) {
        const LogEntry &last = events.back();
        if (entry.t < last.t)
            throw TelemetryError("time regression: " + entry.kind + " at t=" + std::to_string(entry.t) +
                                 " after t=" + std::to_string(last.t));
        if (last.kind == kinds::kSessionEnd)
            throw TelemetryError("entry after session_end");
        if (entry.kind == kinds::kSessionStart)
            throw TelemetryError("session_start must be the first entry");
    }
    if (!entry.payload.is_object())
        throw TelemetryError("log entry payload must be an object");
    events.push_back(std::move(entry));
}

SessionLog append(const SessionLog &log, LogEntry entry) {
    SessionLog out = log;
    out.push(std::move(entry));
    return out;
}

LogDecodeError::LogDecodeError(std::size_t line, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

ordered_json meta_json(const std::optional<SubjectMeta> &m) {
    if (!m)
        return nullptr;
    ordered_json j;
    j["is_gamer"] = m->is_gamer;
    j["fire_training"] = m->fire_training;
    j["drill_experience"] = m->drill_experience;
    j["real_fire_experience"] = m->real_fire_experience;
    j["followed_signage"] = m->followed_signage;
    return j;
}

SubjectMeta meta_from(const json &j, std::size_t line) {
    SubjectMeta m;
    auto flag = [&](const char *key) {
        if (!j.contains(key) || !j.at(key).is_boolean())
            throw LogDecodeError(line, std::string("subject_meta.") + key + " must be true or false");
        return j.at(key).get<bool>();
    };
    m.is_gamer = flag("is_gamer");
    m.fire_training = flag("fire_training");
    m.drill_experience = flag("drill_experience");
    m.real_fire_experience = flag("real_fire_experience");
    m.followed_signage = flag("followed_signage");
    return m;
}

} // namespace

std::string encode(const SessionLog &log) {
    ordered_json header;
    header["version"] = log.version;
    header["session_id"] = log.session_id;
    header["subject_id"] = log.subject_id;
    header["plan_digest"] = log.plan_digest;
    header["subject_meta"] = meta_json(log.subject_meta);

    std::string out = header.dump();
    out += '\n';
    for (const auto &e : log.events) {
        ordered_json line;
        line["t"] = e.t;
        line["kind"] = e.kind;
        line["payload"] = e.payload;
        out += line.dump();
        out += '\n';
    }
    return out;
}

SessionLog decode(std::string_view bytes, DecodeMode mode) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    bool last_terminated = true;
    while (pos < bytes.size()) {
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(bytes.substr(pos));
            last_terminated = false;
            break;
        }
        lines.push_back(bytes.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (lines.empty())
        throw LogDecodeError(1, "empty log: missing header line");

    auto parse_line = [&](std::size_t i) -> json {
        try {
            return json::parse(lines[i]);
        } catch (const json::parse_error &e) {
            throw LogDecodeError(i + 1, std::string("malformed JSON: ") + e.what());
        }
    };

    SessionLog log;
    const json header = parse_line(0);
    if (!header.is_object())
        throw LogDecodeError(1, "header must be a JSON object");
    if (!header.contains("version") || !header.at("version").is_number_integer())
        throw LogDecodeError(1, "header is missing an integer version");
    log.version = header.at("version").get<int>();
    if (log.version != kLogVersion)
        throw LogDecodeError(1, "unsupported log version " + std::to_string(log.version));
    if (!header.contains("session_id") || !header.at("session_id").is_string())
        throw LogDecodeError(1, "header is missing session_id");
    log.session_id = header.at("session_id").get<std::string>();
    if (header.contains("subject_id") && header.at("subject_id").is_string())
        log.subject_id = header.at("subject_id").get<std::string>();
    if (header.contains("plan_digest") && header.at("plan_digest").is_string())
        log.plan_digest = header.at("plan_digest").get<std::string>();
    if (!header.contains("subject_meta"))
        throw LogDecodeError(1, "header is missing subject_meta");
    if (!header.at("subject_meta").is_null()) {
        if (!header.at("subject_meta").is_object())
            throw LogDecodeError(1, "subject_meta must be an object or null");
        log.subject_meta = meta_from(header.at("subject_meta"), 1);
    }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const bool final_line = i + 1 == lines.size();
        json j;
        try {
            j = parse_line(i);
            if (final_line && !last_terminated)
                throw LogDecodeError(i + 1, "truncated final line (no newline)");
        } catch (const LogDecodeError &) {
            if (mode == DecodeMode::Lenient && final_line)
                break;
            throw;
        }
        if (!j.is_object())
            throw LogDecodeError(i + 1, "event must be a JSON object");
        if (!j.contains("t") || !j.at("t").is_number())
            throw LogDecodeError(i + 1, "event is missing numeric t");
        if (!j.contains("kind") || !j.at("kind").is_string())
            throw LogDecodeError(i + 1, "event is missing string kind");
        LogEntry e;
        e.t = j.at("t").get<double>();
        e.kind = j.at("kind").get<std::string>();
        if (j.contains("payload"))
            e.payload = j.at("payload");
        try {
            log.push(std::move(e));
        } catch (const TelemetryError &err) {
            throw LogDecodeError(i + 1, err.what());
        }
    }
    return log;
}

SessionLog read_log_file(const std::string &path, DecodeMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open log " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return decode(ss.str(), mode);
    } catch (const LogDecodeError &e) {
        throw LogDecodeError(e.line(), path + ": " + e.what());
    }
}

void write_log_file(const std::string &path, const SessionLog &log) {
    // write beside the target, then rename, so readers never see half a log
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write log " + path);
        out << encode(log);
        out.flush();
        if (!out)
            throw std::runtime_error("cannot write log " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot write log " + path);
    }
}

DecisionRecord summarize(const SessionLog &log) {
    ScenarioState state;
    std::optional<double> failed_t;
    for (const auto &e : log.events) {
        if (auto ev = event_from_entry(e))
            state = advance(state, *ev).state;
        else if (e.kind == kinds::kEgressFailed && !failed_t)
            failed_t = e.t;
    }

    std::vector<std::string> missing;
    if (!state.alarm_t)
        missing.emplace_back("missing AlarmRaised");
    if (!state.answer_t)
        missing.emplace_back("missing AnswerGiven");
    if (!state.exit_label && !failed_t)
        missing.emplace_back("missing ExitReached");
    if (!log.subject_meta)
        missing.emplace_back("missing subject_meta");
    if (!missing.empty()) {
        std::string msg = "cannot summarize session " + log.session_id + ":";
        for (const auto &m : missing)
            msg += " " + m + ";";
        msg.pop_back();
        throw SummaryError(msg);
    }

    DecisionRecord r;
    r.subject_id = log.subject_id.empty() ? log.session_id : log.subject_id;
    r.alarm_response = state.answer;
    r.pre_evac_time_s = *state.answer_t - *state.alarm_t;
    r.exit_used = state.exit_label;
    const double end = state.end_t ? *state.end_t : *failed_t;
    r.total_evac_time_s = end - *state.alarm_t;
    r.rescued = state.rescued;
    if (state.rescued && state.rescue_t)
        r.rescue_time_s = *state.rescue_t - *state.alarm_t;
    const SubjectMeta &m = *log.subject_meta;
    r.followed_signage = m.followed_signage;
    r.is_gamer = m.is_gamer;
    r.fire_training = m.fire_training;
    r.drill_experience = m.drill_experience;
    r.real_fire_experience = m.real_fire_experience;
    return r;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

} // namespace

json record_to_json(const DecisionRecord &r) {
    json j;
    j["subject_id"] = r.subject_id;
    j["alarm_response"] = r.alarm_response ? json(to_string(*r.alarm_response)) : json();
    j["rescued"] = r.rescued;
    j["exit_used"] = r.exit_used ? json(to_string(*r.exit_used)) : json();
    j["pre_evac_time_s"] = r.pre_evac_time_s;
    j["rescue_time_s"] = r.rescue_time_s ? json(*r.rescue_time_s) : json();
    j["total_evac_time_s"] = r.total_evac_time_s;
    j["followed_signage"] = r.followed_signage;
    j["is_gamer"] = r.is_gamer;
    j["fire_training"] = r.fire_training;
    j["drill_experience"] = r.drill_experience;
    j["real_fire_experience"] = r.real_fire_experience;
    return j;
}

std::string records_to_csv(std::span<const DecisionRecord> records) {
    std::string out;
    for (std::size_t i = 0; i < kRecordColumns.size(); ++i)
        out += std::string(i ? "," : "") + kRecordColumns[i];
    out += '\n';
    auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    for (const auto &r : records) {
        out += csv_field(r.subject_id) + ',' + (r.alarm_response ? to_string(*r.alarm_response) : std::string()) + ',' + b(r.rescued) + ',' +
               (r.exit_used ? to_string(*r.exit_used) : std::string()) + ',' + fmt_double(r.pre_evac_time_s) + ',' +
               (r.rescue_time_s ? fmt_double(*r.rescue_time_s) : std::string()) + ',' +
               fmt_double(r.total_evac_time_s) + ',' + b(r.followed_signage) + ',' + b(r.is_gamer) + ',' +
               b(r.fire_training) + ',' + b(r.drill_experience) + ',' + b(r.real_fire_experience) + '\n';
    }
    return out;
}

std::vector<DecisionRecord> records_from_csv(std::string_view text) {
    std::vector<DecisionRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        const std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto f = split_csv_line(line);
        if (line_no == 1) {
            bool ok = f.size() == kRecordColumns.size();
            for (std::size_t i = 0; ok && i < f.size(); ++i)
                ok = f[i] == kRecordColumns[i];
            if (!ok)
                throw std::runtime_error("records CSV: unexpected header on line 1");
            continue;
        }
        auto fail = [&](const std::string &what) {
            throw std::runtime_error("records CSV line " + std::to_string(line_no) + ": " + what);
        };
        if (f.size() != kRecordColumns.size())
            fail("expected " + std::to_string(kRecordColumns.size()) + " fields");
        auto num = [&](const std::string &s) {
            double v = 0.0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                fail("bad number '" + s + "'");
            return v;
        };
        auto flag = [&](const std::string &s) {
            if (s != "0" && s != "1")
                fail("bad flag '" + s + "'");
            return s == "1";
        };
        DecisionRecord r;
        r.subject_id = f[0];
        if (!f[1].empty()) {
            auto choice = parse_alarm_choice(f[1]);
            if (!choice)
                fail("bad alarm_response '" + f[1] + "'");
            r.alarm_response = *choice;
        }
        r.rescued = flag(f[2]);
        if (!f[3].empty()) {
            r.exit_used = parse_exit_label(f[3]);
            if (!r.exit_used)
                fail("bad exit_used '" + f[3] + "'");
        }
        r.pre_evac_time_s = num(f[4]);
        if (!f[5].empty())
            r.rescue_time_s = num(f[5]);
        r.total_evac_time_s = num(f[6]);
        r.followed_signage = flag(f[7]);
        r.is_gamer = flag(f[8]);
        r.fire_training = flag(f[9]);
        r.drill_experience = flag(f[10]);
        r.real_fire_experience = flag(f[11]);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace eva
