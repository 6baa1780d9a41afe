// _eva: thin pybind11 layer over eva_core. Structured values cross the
// boundary as JSON text; the evadrill package turns them into dicts.
#include "eva/analysis.hpp"
#include "eva/population.hpp"
#include "eva/session.hpp"
#include "eva/validate.hpp"
#include "eva/version.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json meta_json(const eva::SubjectMeta &m) {
    return {{"is_gamer", m.is_gamer},
            {"fire_training", m.fire_training},
            {"drill_experience", m.drill_experience},
            {"real_fire_experience", m.real_fire_experience},
            {"followed_signage", m.followed_signage}};
}

eva::SubjectMeta meta_from(const json &j) {
    eva::SubjectMeta m;
    m.is_gamer = j.value("is_gamer", false);
    m.fire_training = j.value("fire_training", false);
    m.drill_experience = j.value("drill_experience", false);
    m.real_fire_experience = j.value("real_fire_experience", false);
    m.followed_signage = j.value("followed_signage", false);
    return m;
}

json log_json(const eva::SessionLog &log) {
    json j{{"version", log.version},
           {"session_id", log.session_id},
           {"subject_id", log.subject_id},
           {"plan_digest", log.plan_digest}};
    j["subject_meta"] = log.subject_meta ? meta_json(*log.subject_meta) : json();
    json events = json::array();
    for (const auto &e : log.events)
        events.push_back({{"t", e.t}, {"kind", e.kind}, {"payload", e.payload}});
    j["events"] = std::move(events);
    return j;
}

eva::SessionLog log_from(const json &j) {
    eva::SessionLog log;
    log.version = j.value("version", eva::kLogVersion);
    log.session_id = j.at("session_id").get<std::string>();
    log.subject_id = j.at("subject_id").get<std::string>();
    log.plan_digest = j.at("plan_digest").get<std::string>();
    if (j.contains("subject_meta") && !j["subject_meta"].is_null())
        log.subject_meta = meta_from(j["subject_meta"]);
    for (const auto &e : j.at("events"))
        log.push(eva::LogEntry{e.at("t").get<double>(), e.at("kind").get<std::string>(),
                               e.value("payload", json::object())});
    return log;
}

json agent_plan_json(const eva::AgentPlan &p) {
    return {{"alarm_response", p.alarm_response ? json(eva::to_string(*p.alarm_response)) : json()},
            {"follows_signage", p.follows_signage},
            {"target_exit", eva::to_string(p.target_exit)},
            {"rescues", p.rescues},
            {"pre_evac_delay_s", p.pre_evac_delay_s}};
}

json records_json(std::span<const eva::DecisionRecord> records) {
    json out = json::array();
    for (const auto &r : records)
        out.push_back(eva::record_to_json(r));
    return out;
}

eva::BehaviorProfile profile_from_text(const std::string &text) {
    return eva::profile_from_json(json::parse(text));
}

std::string simulate(const std::string &plan_path, const std::string &profile_text, std::size_t n_agents,
                     std::uint64_t seed, bool isolated, double time_limit_s, std::optional<std::string> out_dir) {
    const auto plan = eva::load_floorplan(plan_path);
    const auto profile = profile_from_text(profile_text);
    eva::BatchOptions opts;
    opts.isolated = isolated;
    opts.time_limit_s = time_limit_s;
    eva::BatchResult result;
    {
        py::gil_scoped_release nogil;
        result = eva::run_batch(plan, profile, n_agents, seed, eva::DynamicsParams{}, opts);
    }
    if (out_dir) {
        fs::create_directories(*out_dir);
        for (const auto &log : result.logs)
            eva::write_log_file((fs::path(*out_dir) / (log.session_id + ".evlog")).string(), log);
        std::ofstream(fs::path(*out_dir) / "records.csv") << eva::records_to_csv(result.records);
    }
    json plans = json::array();
    for (const auto &p : result.plans)
        plans.push_back(agent_plan_json(p));
    return json{{"records", records_json(result.records)}, {"plans", std::move(plans)}}.dump();
}

std::string replay_file(const std::string &log_path, const std::string &plan_path) {
    const auto log = eva::read_log_file(log_path);
    auto plan = std::make_shared<const eva::FloorPlan>(eva::load_floorplan(plan_path));
    const auto v = eva::replay(log, plan);
    json j{{"match", v.match}, {"session_id", log.session_id}};
    j["record"] = v.record ? eva::record_to_json(*v.record) : json();
    j["first_divergence"] = v.first_divergence ? json(*v.first_divergence) : json();
    j["detail"] = v.detail;
    return j.dump();
}

std::string analyze(const std::string &path, const std::string &format) {
    const auto records = eva::load_records(path);
    const auto tables = eva::tabulate(records);
    const auto times = eva::time_summary(records);
    if (format == "csv")
        return eva::report_csv(tables, times);
    if (format == "text")
        return eva::report_text(tables, times);
    throw std::invalid_argument("format must be text or csv, got " + format);
}

} // namespace

PYBIND11_MODULE(_eva, m) {
    m.doc() = "EVA fire-drill core";

    py::register_exception<eva::LogDecodeError>(m, "LogDecodeError", PyExc_ValueError);
    py::register_exception<eva::SummaryError>(m, "SummaryError", PyExc_ValueError);
    py::register_exception<eva::AnalysisError>(m, "AnalysisError", PyExc_ValueError);

    m.def("version", [] { return std::string(eva::kVersion); });

    m.def(
        "validate_plan", [](const std::string &path, double cell) { return eva::validate_plan_file(path, cell).violations; },
        py::arg("path"), py::arg("cell_size") = 0.5);
    m.def("load_plan", [](const std::string &path) { return eva::to_json(eva::load_floorplan(path)).dump(); });
    m.def("plan_digest", [](const std::string &path) { return eva::plan_digest(eva::load_floorplan(path)); });

    m.def(
        "fit_profile",
        [](const std::string &path, double alpha) {
            const auto records = eva::load_records(path);
            return eva::profile_to_json(eva::fit_profile(records, eva::FitOptions{alpha})).dump();
        },
        py::arg("records_path"), py::arg("alpha") = 0.0);
    m.def("load_profile", [](const std::string &path) { return eva::profile_to_json(eva::load_profile(path)).dump(); });
    m.def("profile_distance", [](const std::string &a, const std::string &b) {
        return eva::profile_distance(profile_from_text(a), profile_from_text(b));
    });
    m.def("sample_plan", [](const std::string &profile, std::uint64_t seed) {
        return agent_plan_json(eva::sample_plan(profile_from_text(profile), seed)).dump();
    });
    m.def("simulate", &simulate, py::arg("plan_path"), py::arg("profile"), py::arg("n_agents"), py::arg("seed"),
          py::arg("isolated") = false, py::arg("time_limit_s") = 900.0, py::arg("out_dir") = std::nullopt);

    m.def("load_records", [](const std::string &path) { return records_json(eva::load_records(path)).dump(); });
    m.def("analyze", &analyze, py::arg("path"), py::arg("format") = "text");

    m.def(
        "decode_log",
        [](const std::string &text, bool lenient) {
            return log_json(eva::decode(text, lenient ? eva::DecodeMode::Lenient : eva::DecodeMode::Strict)).dump();
        },
        py::arg("text"), py::arg("lenient") = false);
    m.def("encode_log", [](const std::string &log) { return eva::encode(log_from(json::parse(log))); });
    m.def("summarize_log", [](const std::string &text) {
        return eva::record_to_json(eva::summarize(eva::decode(text))).dump();
    });
    m.def("replay", &replay_file, py::arg("log_path"), py::arg("plan_path"));
}
