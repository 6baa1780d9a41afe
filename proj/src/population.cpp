#include "eva/population.hpp"
#include "eva/rng.hpp"
#include "eva/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace eva {

using nlohmann::json;

double DelayModel::median() const { return std::exp(mu); }

namespace {

void check_prob(double p, const char *name) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
        throw ProfileError(std::string(name) + " must be a probability in [0, 1]");
}

void check_dist(const std::array<double, 4> &d, const char *name, bool allow_shortfall = false) {
    double sum = 0.0;
    for (double p : d) {
        check_prob(p, name);
        sum += p;
    }
    if (sum > 1.0 + 1e-9 || (!allow_shortfall && sum < 1.0 - 1e-9))
        throw ProfileError(std::string(name) + " must sum to 1 (got " + std::to_string(sum) + ")");
}

} // namespace

void BehaviorProfile::validate() const {
    check_dist(alarm_dist, "alarm_dist", true);
    check_dist(exit_dist, "exit_dist");
    check_prob(p_signage, "p_signage");
    check_prob(p_rescue, "p_rescue");
    if (pre_evac_delay.family != "lognormal")
        throw ProfileError("pre_evac_delay.family must be \"lognormal\"");
    if (!std::isfinite(pre_evac_delay.mu) || !std::isfinite(pre_evac_delay.sigma) || pre_evac_delay.sigma < 0.0)
        throw ProfileError("pre_evac_delay needs finite mu and sigma >= 0");
}

BehaviorProfile fit_profile(std::span<const DecisionRecord> records, const FitOptions &options) {
    if (records.empty())
        throw ProfileError("fit_profile needs at least one record");
    const double alpha = options.laplace_alpha;
    if (!std::isfinite(alpha) || alpha < 0.0)
        throw ProfileError("laplace_alpha must be >= 0");

    std::array<double, 4> alarm{};
    std::array<double, 4> exits{};
    double signage = 0.0;
    double rescue = 0.0;
    double with_exit = 0.0;
    std::vector<double> logs;
    for (const auto &r : records) {
        if (r.alarm_response)
            alarm[index_of(*r.alarm_response)] += 1.0;
        if (r.exit_used) {
            exits[index_of(*r.exit_used)] += 1.0;
            with_exit += 1.0;
        }
        signage += r.followed_signage ? 1.0 : 0.0;
        rescue += r.rescued ? 1.0 : 0.0;
        if (r.pre_evac_time_s > 0.0 && std::isfinite(r.pre_evac_time_s))
            logs.push_back(std::log(r.pre_evac_time_s));
    }
    const double n = static_cast<double>(records.size());

    BehaviorProfile p;
    for (std::size_t i = 0; i < 4; ++i)
        p.alarm_dist[i] = (alarm[i] + alpha) / (n + 4 * alpha);
    if (with_exit + 4 * alpha > 0.0)
        for (std::size_t i = 0; i < 4; ++i)
            p.exit_dist[i] = (exits[i] + alpha) / (with_exit + 4 * alpha);
    p.p_signage = (signage + alpha) / (n + 2 * alpha);
    p.p_rescue = (rescue + alpha) / (n + 2 * alpha);

    if (logs.size() >= 2) {
        const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size());
        double ss = 0.0;
        for (double v : logs)
            ss += (v - mean) * (v - mean);
        p.pre_evac_delay.mu = mean;
        p.pre_evac_delay.sigma = std::max(0.1, std::sqrt(ss / static_cast<double>(logs.size() - 1)));
    }
    return p;
}

json profile_to_json(const BehaviorProfile &p) {
    json alarm = json::object();
    json exits = json::object();
    for (AlarmChoice c : kAlarmChoices)
        alarm[to_string(c)] = p.alarm_dist[index_of(c)];
    for (ExitLabel l : kExitLabels)
        exits[to_string(l)] = p.exit_dist[index_of(l)];
    return json{{"alarm_dist", alarm},
                {"exit_dist", exits},
                {"p_signage", p.p_signage},
                {"p_rescue", p.p_rescue},
                {"pre_evac_delay",
                 {{"family", p.pre_evac_delay.family},
                  {"params", {{"mu", p.pre_evac_delay.mu}, {"sigma", p.pre_evac_delay.sigma}}}}}};
}

BehaviorProfile profile_from_json(const json &j) {
    BehaviorProfile p;
    try {
        for (AlarmChoice c : kAlarmChoices)
            p.alarm_dist[index_of(c)] = j.at("alarm_dist").at(to_string(c)).get<double>();
        for (ExitLabel l : kExitLabels)
            p.exit_dist[index_of(l)] = j.at("exit_dist").at(to_string(l)).get<double>();
        p.p_signage = j.at("p_signage").get<double>();
        p.p_rescue = j.at("p_rescue").get<double>();
        if (j.contains("pre_evac_delay")) {
            const auto &d = j.at("pre_evac_delay");
            p.pre_evac_delay.family = d.at("family").get<std::string>();
            p.pre_evac_delay.mu = d.at("params").at("mu").get<double>();
            p.pre_evac_delay.sigma = d.at("params").at("sigma").get<double>();
        }
    } catch (const json::exception &e) {
        throw ProfileError(std::string("bad profile: ") + e.what());
    }
    p.validate();
    return p;
}

BehaviorProfile load_profile(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ProfileError("cannot open profile " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw ProfileError(path + ": " + e.what());
    }
    return profile_from_json(j);
}

void save_profile(const std::string &path, const BehaviorProfile &p) {
    std::ofstream out(path);
    if (!out)
        throw ProfileError("cannot write profile " + path);
    out << profile_to_json(p).dump(2) << "\n";
}

double profile_distance(const BehaviorProfile &a, const BehaviorProfile &b) {
    auto tv = [](const std::array<double, 4> &p, const std::array<double, 4> &q) {
        double s = 0.0;
        double rest_p = 1.0;
        double rest_q = 1.0;
        for (std::size_t i = 0; i < 4; ++i) {
            s += std::abs(p[i] - q[i]);
            rest_p -= p[i];
            rest_q -= q[i];
        }
        return (s + std::abs(rest_p - rest_q)) / 2.0;
    };
    // Two-point TV is just the difference in the success probability.
    return std::max({tv(a.alarm_dist, b.alarm_dist), tv(a.exit_dist, b.exit_dist), std::abs(a.p_signage - b.p_signage),
                     std::abs(a.p_rescue - b.p_rescue)});
}

namespace {

// Nothing when u falls in the shortfall of a distribution summing below 1.
std::optional<std::size_t> draw_categorical(const std::array<double, 4> &dist, double u) {
    double cum = 0.0;
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] <= 0.0)
            continue;
        last = i;
        cum += dist[i];
        if (u < cum)
            return i;
    }
    if (cum < 1.0 - 1e-9)
        return std::nullopt;
    return last; // rounding left u above the final cumulative sum
}

} // namespace

AgentPlan sample_plan(const BehaviorProfile &profile, std::uint64_t seed) {
    auto unit = [&](std::uint64_t stream) { return to_unit_double(derive_seed(seed, stream)); };
    AgentPlan a;
    if (auto k = draw_categorical(profile.alarm_dist, unit(0)))
        a.alarm_response = kAlarmChoices[*k];
    else
        a.alarm_response.reset();
    a.follows_signage = unit(1) < profile.p_signage;
    a.target_exit = kExitLabels[draw_categorical(profile.exit_dist, unit(2)).value_or(0)];
    a.rescues = unit(3) < profile.p_rescue;
    std::mt19937_64 gen(derive_seed(seed, 4));
    std::normal_distribution<double> z(0.0, 1.0);
    a.pre_evac_delay_s = std::exp(profile.pre_evac_delay.mu + profile.pre_evac_delay.sigma * z(gen));
    return a;
}

// ---------------------------------------------------------------------------
// Batch simulation

namespace {

enum class Stage { Escort, Waiting, ToZone, ToExit, Done };

struct Agent {
    AgentPlan plan;
    ScenarioState scenario;
    SessionLog log;
    Stage stage = Stage::Escort;
    double answer_at = 0.0;
    double move_at = 0.0;
    std::optional<std::size_t> zone; // safe zone occupied on the previous tick
};

// Routes depend only on the start cell and the goal, so they are shared by
// every agent in the batch.
class RouteCache {
public:
    RouteCache(const FloorPlan &plan, const NavGrid &grid) : plan_(plan), grid_(grid) {
        for (std::size_t i = 0; i < grid.cells().size(); ++i) {
            const GridCell c = grid.cell_at(i);
            if (grid.walkable(c) && in_safe_zone(plan, grid.center(c)))
                zone_cells_.push_back(c);
        }
    }

    // goal: 0 = ward, 1 = nearest safe zone, 2 + 2*exit + signage = exit
    std::optional<Route> get(GridCell from, int goal) {
        const auto key = std::make_pair(grid_.index(from), goal);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
        std::optional<Route> r = compute(from, goal);
        cache_.emplace(key, r);
        return r;
    }

private:
    std::optional<Route> compute(GridCell from, int goal) {
        const Vec2 start = grid_.center(from);
        try {
            if (goal == 0)
                return plan_route(grid_, start, plan_.waypoint("F"));
            if (goal == 1)
                return zone_cells_.empty() ? std::nullopt : plan_route_to_any(grid_, start, zone_cells_);
            const ExitLabel label = kExitLabels[static_cast<std::size_t>((goal - 2) / 2)];
            if ((goal - 2) % 2 == 1)
                return signage_route(plan_, grid_, start, label);
            return plan_route_to_exit(grid_, start, label);
        } catch (const RouteError &) {
            return std::nullopt;
        }
    }

    const FloorPlan &plan_;
    const NavGrid &grid_;
    std::vector<GridCell> zone_cells_;
    std::map<std::pair<std::size_t, int>, std::optional<Route>> cache_;
};

ExitLabel route_exit(const NavGrid &grid, const Route &r) {
    const Cell &c = grid.at(r.cells.back());
    return kExitLabels[c.tag];
}

class World {
public:
    World(const FloorPlan &plan, const NavGrid &grid, RouteCache &routes, const DynamicsParams &params,
          const BatchOptions &options)
        : plan_(plan), grid_(grid), routes_(routes), params_(params), options_(options),
          ward_(plan.waypoint("F")), digest_(plan_digest(plan)) {}

    void add(std::int64_t id, const std::string &name, const AgentPlan &ap, Vec2 spawn) {
        Agent a;
        a.plan = ap;
        a.log.session_id = name;
        a.log.subject_id = name;
        a.log.plan_digest = digest_;
        SubjectMeta meta;
        meta.followed_signage = ap.follows_signage;
        a.log.subject_meta = meta;
        agents_.push_back(std::move(a));

        AgentState s;
        s.id = id;
        s.position = spawn;
        s.radius = params_.radius;
        s.desired_speed = params_.desired_speed;
        states_.push_back(s);
    }

    void run() {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            Agent &a = agents_[i];
            a.log.push({0.0, kinds::kSessionStart,
                        {{"mode", "artificial"},
                         {"plan",
                          {{"alarm_response", a.plan.alarm_response ? json(to_string(*a.plan.alarm_response)) : json()},
                           {"follows_signage", a.plan.follows_signage},
                           {"target_exit", to_string(a.plan.target_exit)},
                           {"rescues", a.plan.rescues},
                           {"pre_evac_delay_s", a.plan.pre_evac_delay_s}}}}});
            fire(i, DrillEvent{0.0, drill::Spawned{}});
            states_[i].pushing_wheelchair = true;
            steer(i, 0, std::nullopt);
            if (!states_[i].route)
                raise_alarm_without_escort(i, 0.0);
        }

        const auto limit_ticks = static_cast<std::int64_t>(std::ceil(options_.time_limit_s / params_.dt));
        std::int64_t tick = 0;
        std::vector<std::size_t> live;
        std::vector<AgentState> moving;
        while (true) {
            live.clear();
            for (std::size_t i = 0; i < agents_.size(); ++i)
                if (agents_[i].stage != Stage::Done)
                    live.push_back(i);
            if (live.empty())
                break;
            if (tick >= limit_ticks) {
                for (std::size_t i : live)
                    fail(i, tick * params_.dt, "time_limit");
                break;
            }

            moving.clear();
            for (std::size_t i : live)
                moving.push_back(states_[i]);
            std::vector<AgentState> next = integrate(moving, grid_, params_);
            ++tick;
            const double t = static_cast<double>(tick) * params_.dt;

            for (std::size_t k = 0; k < live.size(); ++k) {
                const std::size_t i = live[k];
                // Waiting agents hold their position.
                if (agents_[i].stage == Stage::Waiting) {
                    states_[i].velocity = {};
                } else {
                    const Vec2 prev = states_[i].position;
                    states_[i] = next[k];
                    observe(i, prev, t);
                }
                update(i, t);
                if (tick % 20 == 0 && agents_[i].stage != Stage::Done)
                    agents_[i].log.push({t, kinds::kTrack,
                                         {{"x", states_[i].position.x}, {"y", states_[i].position.y}}});
            }
        }
    }

    std::vector<Agent> &agents() { return agents_; }

private:
    void fire(std::size_t i, const DrillEvent &ev) {
        Agent &a = agents_[i];
        AdvanceResult r = advance(a.scenario, ev);
        a.scenario = r.state;
        for (auto &e : r.emitted)
            a.log.push(std::move(e));
    }

    // Sets the route toward `goal`; false when there is none.
    bool steer(std::size_t i, int goal, std::optional<ExitLabel> exit) {
        AgentState &s = states_[i];
        auto cell = grid_.cell_of(s.position);
        std::optional<Route> r = cell ? routes_.get(*cell, goal) : std::nullopt;
        s.route = r;
        s.route_index = 0;
        s.final_target.reset();
        if (!r)
            return false;
        if (exit)
            s.final_target = point_beyond_exit(plan_, *exit, r->points.front());
        else
            s.final_target = r->points.back();
        return true;
    }

    void raise_alarm_without_escort(std::size_t i, double t) {
        fire(i, DrillEvent{t, drill::AlarmRaised{}});
        begin_wait(i, t);
    }

    void begin_wait(std::size_t i, double t) {
        Agent &a = agents_[i];
        a.stage = Stage::Waiting;
        a.answer_at = t + a.plan.pre_evac_delay_s;
        const bool idle_answer = a.plan.alarm_response == AlarmChoice::A || a.plan.alarm_response == AlarmChoice::B;
        a.move_at = a.answer_at + (idle_answer ? options_.ab_extra_delay_s : 0.0);
        states_[i].route.reset();
        states_[i].final_target.reset();
        states_[i].velocity = {};
    }

    void head_for_exit(std::size_t i, double t) {
        const AgentPlan &p = agents_[i].plan;
        const int goal = 2 + 2 * static_cast<int>(index_of(p.target_exit)) + (p.follows_signage ? 1 : 0);
        AgentState &s = states_[i];
        auto cell = grid_.cell_of(s.position);
        std::optional<Route> r = cell ? routes_.get(*cell, goal) : std::nullopt;
        if (!r) {
            fail(i, t, "unreachable");
            return;
        }
        steer(i, goal, route_exit(grid_, *r));
        agents_[i].stage = Stage::ToExit;
    }

    void release(std::size_t i, double t) {
        if (!states_[i].pushing_wheelchair)
            return;
        states_[i].pushing_wheelchair = false;
        fire(i, DrillEvent{t, drill::WheelchairReleased{}});
    }

    // Zone and exit crossings caused by the last move.
    void observe(std::size_t i, Vec2 prev, double t) {
        Agent &a = agents_[i];
        if (a.scenario.phase != DrillPhase::Evacuation)
            return;
        const Vec2 now = states_[i].position;
        auto zone = safe_zone_at(plan_, now);
        if (zone && zone != a.zone)
            fire(i, DrillEvent{t, drill::SafeZoneReached{plan_.safe_zones[*zone].label}});
        a.zone = zone;
        if (auto label = exit_hit(plan_, prev, now)) {
            fire(i, DrillEvent{t, drill::ExitReached{*label}});
            finish(i, t, "finished");
        }
    }

    void update(std::size_t i, double t) {
        Agent &a = agents_[i];
        switch (a.stage) {
        case Stage::Escort:
            if (distance(states_[i].position, ward_) <= kWardArrivalRadius) {
                fire(i, DrillEvent{t, drill::ReachedWard{}});
                begin_wait(i, t);
            }
            break;
        case Stage::Waiting:
            if (!a.scenario.answer_t && t >= a.answer_at)
                fire(i, DrillEvent{t, drill::AnswerGiven{a.plan.alarm_response}});
            if (a.scenario.answer_t && t >= a.move_at) {
                a.zone = safe_zone_at(plan_, states_[i].position);
                if (a.plan.rescues && steer(i, 1, std::nullopt)) {
                    a.stage = Stage::ToZone;
                    update(i, t); // may already stand in a zone
                } else {
                    release(i, t);
                    head_for_exit(i, t);
                }
            }
            break;
        case Stage::ToZone:
            if (a.scenario.rescue_decided) {
                release(i, t);
                head_for_exit(i, t);
            } else if (a.zone) {
                fire(i, DrillEvent{t, drill::SafeZoneReached{plan_.safe_zones[*a.zone].label}});
                release(i, t);
                head_for_exit(i, t);
            }
            break;
        case Stage::ToExit:
        case Stage::Done: break;
        }
    }

    void fail(std::size_t i, double t, const char *reason) {
        Agent &a = agents_[i];
        if (!a.scenario.alarm_t)
            fire(i, DrillEvent{t, drill::AlarmRaised{}});
        if (!a.scenario.answer_t)
            fire(i, DrillEvent{t, drill::AnswerGiven{a.plan.alarm_response}});
        a.log.push({t, kinds::kEgressFailed, {{"reason", reason}}});
        finish(i, t, reason);
    }

    void finish(std::size_t i, double t, const char *reason) {
        agents_[i].stage = Stage::Done;
        agents_[i].log.push({t, kinds::kSessionEnd, {{"reason", reason}}});
        states_[i].route.reset();
        states_[i].velocity = {};
    }

    const FloorPlan &plan_;
    const NavGrid &grid_;
    RouteCache &routes_;
    const DynamicsParams &params_;
    const BatchOptions &options_;
    Vec2 ward_;
    std::string digest_;
    std::vector<Agent> agents_;
    std::vector<AgentState> states_;
};

// Walkable cell centers in breadth-first order from the cell holding `p`.
std::vector<Vec2> spawn_points(const NavGrid &grid, Vec2 p, std::size_t n) {
    std::vector<Vec2> out{p};
    auto start = grid.cell_of(p);
    if (!start)
        return out;
    std::vector<bool> seen(grid.cells().size(), false);
    std::deque<GridCell> queue{*start};
    seen[grid.index(*start)] = true;
    while (!queue.empty() && out.size() < n) {
        const GridCell c = queue.front();
        queue.pop_front();
        if (c != *start)
            out.push_back(grid.center(c));
        for (auto [dc, dr] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const GridCell nb{c.col + dc, c.row + dr};
            if (grid.walkable(nb) && !seen[grid.index(nb)]) {
                seen[grid.index(nb)] = true;
                queue.push_back(nb);
            }
        }
    }
    return out;
}

std::string agent_name(std::uint64_t seed, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "agent-%016llx-%05zu", static_cast<unsigned long long>(seed), i);
    return buf;
}

} // namespace

BatchResult run_batch(const FloorPlan &plan, const BehaviorProfile &profile, std::size_t n_agents,
                      std::uint64_t seed, const DynamicsParams &params, const BatchOptions &options) {
    if (n_agents == 0)
        throw std::invalid_argument("run_batch needs at least one agent");
    profile.validate();
    params.validate();

    const NavGrid grid = build_nav_grid(plan, GridOptions{options.cell_size});
    RouteCache routes(plan, grid);
    const Vec2 e = plan.waypoint("E");

    BatchResult out;
    for (std::size_t i = 0; i < n_agents; ++i)
        out.plans.push_back(sample_plan(profile, derive_seed(seed, i)));

    auto collect = [&](World &w) {
        for (auto &a : w.agents()) {
            out.records.push_back(summarize(a.log));
            out.logs.push_back(std::move(a.log));
        }
    };

    if (options.isolated) {
        for (std::size_t i = 0; i < n_agents; ++i) {
            World w(plan, grid, routes, params, options);
            w.add(static_cast<std::int64_t>(i), agent_name(seed, i), out.plans[i], e);
            w.run();
            collect(w);
        }
    } else {
        const auto spawns = spawn_points(grid, e, n_agents);
        World w(plan, grid, routes, params, options);
        for (std::size_t i = 0; i < n_agents; ++i)
            w.add(static_cast<std::int64_t>(i), agent_name(seed, i), out.plans[i], spawns[i % spawns.size()]);
        w.run();
        collect(w);
    }
    return out;
}

} // namespace eva
