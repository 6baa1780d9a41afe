// eva: command-line entry point for the drill platform.
#include "eva/analysis.hpp"
#include "eva/config.hpp"
#include "eva/population.hpp"
#include "eva/session.hpp"
#include "eva/validate.hpp"
#include "eva/version.hpp"
#include "eva/ws_server.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 negative verdict (mismatch, invalid plan), 2 error.
constexpr int kVerdictFailed = 1;
constexpr int kError = 2;

struct Common {
    std::string config_path;
    std::map<std::string, double> dyn;
};

eva::RunConfig load_config(const Common &c) {
    eva::RunConfig rc;
    if (!c.config_path.empty())
        rc = eva::load_run_config(c.config_path);
    for (const auto &[name, value] : c.dyn)
        eva::set_dynamics_field(rc.dynamics, name, value);
    rc.dynamics.validate();
    return rc;
}

void add_common(CLI::App *cmd, Common &c, std::map<std::string, double> &dyn_values) {
    cmd->add_option("--config", c.config_path, "INI file with [run] and [dynamics] sections")->check(CLI::ExistingFile);
    for (const auto &name : eva::dynamics_field_names()) {
        cmd->add_option("--dyn." + name, dyn_values[name], "override dynamics parameter " + name)
            ->group("Dynamics overrides");
    }
}

// Keeps only the --dyn.* values actually given on the command line.
void collect_dyn(CLI::App *cmd, Common &c, const std::map<std::string, double> &dyn_values) {
    for (const auto &[name, value] : dyn_values)
        if (cmd->count("--dyn." + name) > 0)
            c.dyn[name] = value;
}

std::string pick(const std::string &flag, const std::optional<std::string> &from_config, const char *fallback) {
    if (!flag.empty())
        return flag;
    if (from_config)
        return *from_config;
    return fallback;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"EVA virtual fire drill: serve drills, simulate artificial populations, analyze logs", "eva"};
    app.set_version_flag("--version", std::string("eva ") + eva::kVersion);
    app.require_subcommand(1);

    // serve
    Common serve_c;
    std::map<std::string, double> serve_dyn;
    std::string serve_plan, serve_logs, serve_ui, serve_addr = "0.0.0.0";
    unsigned short serve_port = 8080;
    int tick_ms = 50;
    auto *serve = app.add_subcommand("serve", "host live drill sessions over WebSocket (/ws)");
    serve->add_option("--plan", serve_plan, "floorplan JSON");
    serve->add_option("--port", serve_port, "TCP port (0 picks a free one)");
    serve->add_option("--address", serve_addr, "listen address");
    serve->add_option("--logs", serve_logs, "log directory (default: $EVA_LOG_DIR, then [run] logs, then ./logs)");
    serve->add_option("--ui", serve_ui, "directory of static client assets to serve over HTTP")
        ->check(CLI::ExistingDirectory);
    serve->add_option("--tick-ms", tick_ms, "wall-clock milliseconds per simulation tick")->check(CLI::PositiveNumber);
    add_common(serve, serve_c, serve_dyn);

    // simulate
    Common sim_c;
    std::map<std::string, double> sim_dyn;
    std::string sim_plan, sim_profile, sim_out, sim_seed;
    std::size_t sim_agents = 20;
    bool sim_isolated = false;
    eva::BatchOptions batch;
    auto *simulate = app.add_subcommand("simulate", "run an artificial population drill");
    simulate->add_option("--plan", sim_plan, "floorplan JSON");
    simulate->add_option("--profile", sim_profile, "behavior profile JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--agents", sim_agents, "number of agents")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_seed, "64-bit seed (decimal or 0x hex)");
    simulate->add_flag("--isolated", sim_isolated, "one world per agent instead of a shared crowd");
    simulate->add_option("--out", sim_out, "output directory for .evlog files and records.csv");
    simulate->add_option("--time-limit", batch.time_limit_s, "seconds before an agent counts as failed egress");
    simulate->add_option("--ab-delay", batch.ab_extra_delay_s, "extra wait for agents answering a) or b)");
    add_common(simulate, sim_c, sim_dyn);

    // replay
    std::string replay_log, replay_plan;
    bool replay_lenient = false;
    auto *rep = app.add_subcommand("replay", "re-simulate a recorded session and check it matches");
    rep->add_option("log", replay_log, ".evlog file")->required()->check(CLI::ExistingFile);
    rep->add_option("--plan", replay_plan, "floorplan JSON the session was played on")->required();
    rep->add_flag("--lenient", replay_lenient, "tolerate a truncated final line");

    // analyze
    std::string an_path, an_format = "text";
    auto *analyze = app.add_subcommand("analyze", "tabulate decisions from .evlog files or records CSVs");
    analyze->add_option("path", an_path, "directory or file")->required()->check(CLI::ExistingPath);
    analyze->add_option("--format", an_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    // fit
    std::string fit_path, fit_out;
    double fit_alpha = 0.0;
    auto *fit = app.add_subcommand("fit", "fit a behavior profile from recorded decisions");
    fit->add_option("path", fit_path, "directory or file")->required()->check(CLI::ExistingPath);
    fit->add_option("--out", fit_out, "write the profile here as well as to stdout");
    fit->add_option("--laplace", fit_alpha, "additive smoothing for the categorical fields");

    // validate-plan
    std::string vp_plan;
    double vp_cell = 0.5;
    auto *vp = app.add_subcommand("validate-plan", "check a floorplan and list every problem");
    vp->add_option("plan", vp_plan, "floorplan JSON")->required();
    vp->add_option("--cell-size", vp_cell, "grid resolution used for reachability (m)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        // help and --version exit 0; every usage problem is an error
        return app.exit(e) == 0 ? 0 : kError;
    }

    try {
        if (*serve) {
            collect_dyn(serve, serve_c, serve_dyn);
            const eva::RunConfig rc = load_config(serve_c);
            const std::string plan_path = pick(serve_plan, rc.plan, "");
            if (plan_path.empty())
                throw CLI::RequiredError("--plan");
            std::string logs = serve_logs;
            if (logs.empty()) {
                const char *env = std::getenv("EVA_LOG_DIR");
                logs = env && *env ? std::string(env) : pick("", rc.logs, "logs");
            }
            auto plan = std::make_shared<const eva::FloorPlan>(eva::load_floorplan(plan_path));
            eva::SessionConfig sc;
            sc.wheelchair_factor = rc.dynamics.wheelchair_factor;
            eva::SessionHost host(plan, logs, sc);
            eva::ServerOptions opts;
            opts.address = serve_addr;
            opts.port = serve_port;
            if (!serve_ui.empty())
                opts.ui_dir = serve_ui;
            opts.tick_period = std::chrono::milliseconds(tick_ms);
            opts.handle_signals = true;
            eva::DrillServer server(host, opts);
            std::cerr << "eva: serving " << plan->name << " on " << serve_addr << ":" << server.port()
                      << " (ws path /ws), logs in " << logs << "\n";
            server.run();
            return 0;
        }

        if (*simulate) {
            collect_dyn(simulate, sim_c, sim_dyn);
            const eva::RunConfig rc = load_config(sim_c);
            const std::string plan_path = pick(sim_plan, rc.plan, "");
            if (plan_path.empty())
                throw CLI::RequiredError("--plan");
            const std::uint64_t seed = !sim_seed.empty() ? eva::parse_seed(sim_seed) : rc.seed.value_or(1);
            const std::string out = pick(sim_out, rc.out, "sim_out");
            batch.isolated = sim_isolated;
            const auto plan = eva::load_floorplan(plan_path);
            const auto profile = eva::load_profile(sim_profile);
            const auto result = eva::run_batch(plan, profile, sim_agents, seed, rc.dynamics, batch);
            fs::create_directories(out);
            std::size_t failed = 0;
            for (const auto &log : result.logs)
                eva::write_log_file((fs::path(out) / (log.session_id + ".evlog")).string(), log);
            for (const auto &r : result.records)
                failed += r.exit_used ? 0 : 1;
            std::ofstream csv(fs::path(out) / "records.csv");
            csv << eva::records_to_csv(result.records);
            std::cout << json{{"agents", result.records.size()},
                              {"failed_egress", failed},
                              {"seed", seed},
                              {"isolated", sim_isolated},
                              {"out", out}}
                             .dump()
                      << "\n";
            return 0;
        }

        if (*rep) {
            const auto log = eva::read_log_file(replay_log, replay_lenient ? eva::DecodeMode::Lenient
                                                                           : eva::DecodeMode::Strict);
            auto plan = std::make_shared<const eva::FloorPlan>(eva::load_floorplan(replay_plan));
            const auto v = eva::replay(log, plan);
            json j{{"match", v.match}, {"session_id", log.session_id}};
            j["record"] = v.record ? eva::record_to_json(*v.record) : json();
            if (!v.match) {
                j["first_divergence"] = v.first_divergence ? json(*v.first_divergence) : json();
                j["detail"] = v.detail;
            }
            std::cout << j.dump() << "\n";
            return v.match ? 0 : kVerdictFailed;
        }

        if (*analyze) {
            const auto records = eva::load_records(an_path);
            const auto tables = eva::tabulate(records);
            const auto times = eva::time_summary(records);
            std::cout << (an_format == "csv" ? eva::report_csv(tables, times) : eva::report_text(tables, times));
            return 0;
        }

        if (*fit) {
            const auto records = eva::load_records(fit_path);
            const auto profile = eva::fit_profile(records, eva::FitOptions{fit_alpha});
            if (!fit_out.empty())
                eva::save_profile(fit_out, profile);
            std::cout << eva::profile_to_json(profile).dump(2) << "\n";
            return 0;
        }

        if (*vp) {
            if (!std::filesystem::is_regular_file(vp_plan))
                throw std::runtime_error("cannot open " + vp_plan);
            const auto report = eva::validate_plan_file(vp_plan, vp_cell);
            std::cout << report.text();
            return report.ok() ? 0 : kVerdictFailed;
        }
    } catch (const CLI::Error &e) {
        return app.exit(e);
    } catch (const std::exception &e) {
        std::cerr << "eva: error: " << e.what() << "\n";
        return kError;
    }
    return 0;
}
