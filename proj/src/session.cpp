#include "eva/session.hpp"
#include "eva/locale.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eva {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Session

Session::Session(std::shared_ptr<const FloorPlan> plan, std::string session_id, std::string subject_id,
                 SessionConfig config)
    : plan_(std::move(plan)), config_(config), grid_(build_nav_grid(*plan_, GridOptions{config.cell_size})) {
    if (config_.tick_hz <= 0 || config_.snapshot_every <= 0 || config_.track_every <= 0)
        throw std::invalid_argument("session rates must be positive");
    log_.session_id = std::move(session_id);
    log_.subject_id = std::move(subject_id);
    log_.plan_digest = plan_digest(*plan_);
}

wire::Welcome Session::welcome() const {
    return {log_.session_id, log_.subject_id, log_.plan_digest, to_json(*plan_),
            static_cast<double>(config_.tick_hz)};
}

wire::Snapshot Session::snapshot() const {
    wire::Snapshot s;
    s.seq = snapshot_seq_;
    s.t = time();
    s.phase = scenario_.phase;
    s.avatar = avatar_.position;
    s.heading = avatar_.heading;
    s.wheelchair = wheelchair_.position;
    s.attached = wheelchair_.attached;
    for (std::size_t i = 0; i < plan_->doors.size(); ++i)
        s.doors.push_back({plan_->doors[i].id, grid_.door_open(i)});
    return s;
}

std::vector<ServerMessage> Session::start() {
    if (!log_.events.empty())
        throw std::logic_error("session already started");
    std::vector<ServerMessage> out{welcome()};
    log_.push({0.0, kinds::kSessionStart, {{"tick_hz", config_.tick_hz}}});
    avatar_.id = 0;
    avatar_.position = plan_->waypoint("E");
    avatar_.pushing_wheelchair = true;
    wheelchair_.attached = true;
    place_wheelchair();
    fire(DrillEvent{0.0, drill::Spawned{}}, out);
    out.emplace_back(snapshot());
    return out;
}

void Session::receive(ClientMessage message) { inbox_.push_back(std::move(message)); }

void Session::fire(const DrillEvent &event, std::vector<ServerMessage> &out) {
    AdvanceResult r = advance(scenario_, event);
    scenario_ = r.state;
    for (auto &e : r.emitted) {
        if (e.kind == kinds::kAlarmRaised) {
            wire::Question q;
            for (const auto &o : alarm_question())
                q.options.push_back(o);
            out.emplace_back(std::move(q));
        } else if (e.kind == kinds::kInstruction) {
            out.emplace_back(wire::Instruction{e.payload.at("text").get<std::string>()});
        } else if (e.kind == kinds::kGreeting) {
            out.emplace_back(wire::Greeting{e.payload.at("text").get<std::string>()});
        } else if (e.kind == kinds::kExitReached && scenario_.exit_label) {
            const auto &q = locale().post_questions;
            out.emplace_back(wire::Finished{*scenario_.exit_label, e.t - scenario_.alarm_t.value_or(0.0),
                                            std::vector<std::string>(q.begin(), q.end())});
        }
        log_.push(std::move(e));
    }
}

void Session::apply(const ClientMessage &message, std::vector<ServerMessage> &out) {
    const double t = time();
    if (const auto *in = std::get_if<wire::Input>(&message)) {
        if (finished())
            return; // nothing left to steer
        log_.push({t, kinds::kClientInput, input_to_json(in->command)});
        const bool edge = held_.interact || in->command.interact;
        held_ = in->command;
        held_.interact = edge;
    } else if (const auto *a = std::get_if<wire::Answer>(&message)) {
        log_.push({t, kinds::kClientAnswer, {{"choice", a->choice ? json(to_string(*a->choice)) : json()}}});
        fire(DrillEvent{t, drill::AnswerGiven{a->choice}}, out);
    } else if (const auto *p = std::get_if<wire::PostQuestionnaire>(&message)) {
        log_.push({t, kinds::kClientPost, meta_to_json(p->answers)});
        if (!finished()) {
            log_.push({t, kinds::kWarning, {{"ignored", "post_questionnaire"}, {"phase", to_string(scenario_.phase)}}});
            return;
        }
        log_.subject_meta = p->answers;
        seal(kSealCompleted);
        out.emplace_back(wire::Sealed{log_.session_id});
    }
    // hello is handled by the connection layer
}

void Session::place_wheelchair() {
    if (!wheelchair_.attached)
        return;
    const Vec2 ahead = avatar_.position + from_angle(avatar_.heading) * config_.wheelchair_offset;
    wheelchair_.position = grid_.walkable(ahead) ? ahead : avatar_.position;
}

void Session::interact(std::vector<ServerMessage> &out) {
    const double t = time();
    if (wheelchair_.attached) {
        if (!is_legal(scenario_.phase, DrillEventKind::WheelchairReleased))
            return;
        wheelchair_.attached = false;
        avatar_.pushing_wheelchair = false;
        fire(DrillEvent{t, drill::WheelchairReleased{}}, out);
        return;
    }

    std::optional<std::size_t> door;
    double best = config_.interact_radius;
    for (std::size_t i = 0; i < plan_->doors.size(); ++i) {
        const double d = distance_to_segment(plan_->doors[i].segment, avatar_.position);
        if (d <= best) {
            best = d;
            door = i;
        }
    }
    if (door) {
        const bool open = !grid_.door_open(*door);
        const std::string &id = plan_->doors[*door].id;
        if (!open) {
            const auto mine = grid_.cell_of(avatar_.position);
            const auto chair = grid_.cell_of(wheelchair_.position);
            for (std::uint32_t c : grid_.door_cells(*door)) {
                const GridCell cell = grid_.cell_at(c);
                if (cell == mine || cell == chair) {
                    log_.push({t, kinds::kWarning, {{"ignored", "door"}, {"door", id}, {"reason", "occupied"}}});
                    return;
                }
            }
        }
        grid_ = grid_.with_door(*door, open);
        log_.push({t, kinds::kDoor, {{"door", id}, {"open", open}}});
        return;
    }

    if (distance(wheelchair_.position, avatar_.position) <= config_.interact_radius &&
        is_legal(scenario_.phase, DrillEventKind::WheelchairGrabbed)) {
        wheelchair_.attached = true;
        avatar_.pushing_wheelchair = true;
        place_wheelchair();
        fire(DrillEvent{t, drill::WheelchairGrabbed{}}, out);
    }
}

std::vector<ServerMessage> Session::tick() {
    std::vector<ServerMessage> out;
    if (sealed_)
        return out;
    ++tick_;
    const double t = time();

    while (!inbox_.empty() && !sealed_) {
        ClientMessage m = std::move(inbox_.front());
        inbox_.pop_front();
        apply(m, out);
    }
    if (sealed_)
        return out;

    const DrillPhase phase = scenario_.phase;
    if (phase == DrillPhase::EscortToWard || phase == DrillPhase::Evacuation) {
        if (held_.interact)
            interact(out);
        const Vec2 prev = avatar_.position;
        InputCommand cmd = held_;
        cmd.interact = false;
        avatar_ = step_avatar(avatar_, cmd, grid_, dt(), config_.wheelchair_factor);
        place_wheelchair();

        if (phase == DrillPhase::EscortToWard) {
            if (distance(avatar_.position, plan_->waypoint("F")) <= kWardArrivalRadius)
                fire(DrillEvent{t, drill::ReachedWard{}}, out);
        } else {
            const auto zone = safe_zone_at(*plan_, avatar_.position);
            if (zone && zone != zone_)
                fire(DrillEvent{t, drill::SafeZoneReached{plan_->safe_zones[*zone].label}}, out);
            zone_ = zone;
            if (auto label = exit_hit(*plan_, prev, avatar_.position))
                fire(DrillEvent{t, drill::ExitReached{*label}}, out);
        }
    }
    held_.interact = false;

    if (tick_ % static_cast<std::uint64_t>(config_.track_every) == 0 && !finished())
        log_.push({t, kinds::kTrack,
                   {{"x", avatar_.position.x},
                    {"y", avatar_.position.y},
                    {"heading", avatar_.heading},
                    {"wheelchair", {wheelchair_.position.x, wheelchair_.position.y}},
                    {"attached", wheelchair_.attached}}});
    if (tick_ % static_cast<std::uint64_t>(config_.snapshot_every) == 0) {
        ++snapshot_seq_;
        out.emplace_back(snapshot());
    }
    return out;
}

void Session::seal(const std::string &reason) {
    if (sealed_)
        return;
    log_.push({time(), kinds::kSessionEnd, {{"reason", reason}}});
    sealed_ = true;
}

// ---------------------------------------------------------------------------
// SessionHost

namespace {

bool valid_subject(const std::string &id) {
    if (id.empty() || id.size() > 128)
        return false;
    for (unsigned char c : id)
        if (c < 0x20 || c == 0x7f)
            return false;
    return true;
}

} // namespace

SessionHost::SessionHost(std::shared_ptr<const FloorPlan> plan, std::string log_dir, SessionConfig config)
    : plan_(std::move(plan)), log_dir_(std::move(log_dir)), config_(config) {
    fs::create_directories(log_dir_);
    std::ifstream in(registry_path());
    std::string line;
    std::uint64_t lines = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        played_.insert(line);
        ++lines;
    }
    next_index_ = lines + 1;
}

std::string SessionHost::registry_path() const { return (fs::path(log_dir_) / "subjects.registry").string(); }

std::string SessionHost::log_path(const std::string &session_id) const {
    return (fs::path(log_dir_) / (session_id + ".evlog")).string();
}

SessionHost::Created SessionHost::create(const std::string &subject_id) {
    if (!valid_subject(subject_id))
        return {nullptr, wire::Rejected{"invalid subject id"}};
    if (played_.contains(subject_id))
        return {nullptr, wire::Rejected{locale().rejected_already_played}};

    // Persist first: a crash after this point still counts as the one run.
    {
        std::ofstream reg(registry_path(), std::ios::app);
        reg << subject_id << '\n';
        reg.flush();
        if (!reg)
            throw std::runtime_error("cannot write " + registry_path());
    }
    played_.insert(subject_id);

    char id[32];
    std::snprintf(id, sizeof id, "session-%06llu", static_cast<unsigned long long>(next_index_++));
    auto s = std::make_shared<Session>(plan_, id, subject_id, config_);
    live_[id] = s;
    return {s, std::nullopt};
}

std::string SessionHost::close(Session &session, const std::string &reason) {
    session.seal(reason);
    const std::string path = log_path(session.session_id());
    write_log_file(path, session.log());
    live_.erase(session.session_id());
    return path;
}

std::vector<std::shared_ptr<Session>> SessionHost::live() const {
    std::vector<std::shared_ptr<Session>> out;
    for (const auto &[_, s] : live_)
        out.push_back(s);
    return out;
}

// ---------------------------------------------------------------------------
// Pilot

namespace {

std::vector<GridCell> zone_cells(const FloorPlan &plan, const NavGrid &grid) {
    std::vector<GridCell> out;
    for (std::size_t i = 0; i < grid.cells().size(); ++i) {
        const GridCell c = grid.cell_at(i);
        if (grid.walkable(c) && in_safe_zone(plan, grid.center(c)))
            out.push_back(c);
    }
    return out;
}

} // namespace

void Pilot::plan_to(const Session &s, Vec2 goal) {
    route_ = plan_route(s.grid(), s.avatar().position, goal);
    route_index_ = 0;
    beyond_.reset();
}

void Pilot::plan_to_zone(const Session &s) {
    const auto cells = zone_cells(s.plan(), s.grid());
    route_ = plan_route_to_any(s.grid(), s.avatar().position, cells);
    route_index_ = 0;
    beyond_ = route_ ? std::optional<Vec2>(route_->points.back()) : std::nullopt;
}

void Pilot::plan_to_exit(const Session &s) {
    route_ = plan_route_to_exit(s.grid(), s.avatar().position, script_.exit);
    route_index_ = 0;
    beyond_.reset();
    if (route_)
        beyond_ = point_beyond_exit(s.plan(), script_.exit, route_->points.front());
}

InputCommand Pilot::follow(const Session &s) {
    InputCommand cmd;
    const Vec2 pos = s.avatar().position;
    cmd.look_yaw = s.avatar().heading;
    if (!route_)
        return cmd;
    while (route_index_ < route_->points.size() && distance(route_->points[route_index_], pos) < 0.3)
        ++route_index_;
    std::optional<Vec2> target;
    if (route_index_ < route_->points.size())
        target = route_->points[route_index_];
    else if (beyond_ && distance(*beyond_, pos) > 0.05)
        target = beyond_;
    if (!target)
        return cmd;
    const Vec2 d = *target - pos;
    cmd.forward = true;
    cmd.look_yaw = std::atan2(d.y, d.x);
    return cmd;
}

bool Pilot::wants_disconnect(const Session &s) const {
    (void)s;
    return script_.quit_after_ticks >= 0 && ticks_ >= script_.quit_after_ticks;
}

std::vector<ClientMessage> Pilot::next(const Session &s) {
    std::vector<ClientMessage> out;
    ++ticks_;
    const Vec2 pos = s.avatar().position;
    InputCommand cmd;
    cmd.look_yaw = s.avatar().heading;

    switch (s.scenario().phase) {
    case DrillPhase::Briefing: break;
    case DrillPhase::EscortToWard:
        if (stage_ != 1) {
            plan_to(s, s.plan().waypoint("F"));
            stage_ = 1;
        }
        cmd = follow(s);
        if (script_.fumble_tick >= 0 && !fumbled_ && ticks_ >= script_.fumble_tick) {
            fumbled_ = true;
            regrab_ = true;
            cmd = InputCommand{.look_yaw = cmd.look_yaw, .interact = true};
        } else if (regrab_) {
            regrab_ = false;
            cmd = InputCommand{.look_yaw = cmd.look_yaw, .interact = true};
        }
        break;
    case DrillPhase::AlarmQuestion:
        if (!answered_ && ++waited_ >= script_.answer_delay_ticks) {
            answered_ = true;
            out.emplace_back(wire::Answer{script_.answer});
        }
        cmd.forward = false;
        break;
    case DrillPhase::Evacuation:
        if (stage_ < 2) {
            if (script_.rescue && s.wheelchair().attached) {
                plan_to_zone(s);
                stage_ = 2;
            } else {
                if (s.wheelchair().attached)
                    cmd.interact = true; // leave the patient behind
                plan_to_exit(s);
                stage_ = 3;
            }
        }
        if (stage_ == 2 && s.scenario().rescue_decided) {
            plan_to_exit(s);
            stage_ = 3;
        }
        if (!cmd.interact) {
            cmd = follow(s);
            // Unstick by replanning from wherever the avatar ended up.
            stuck_ = cmd.forward && distance(pos, last_pos_) < 1e-6 ? stuck_ + 1 : 0;
            if (stuck_ > 20) {
                stage_ == 2 ? plan_to_zone(s) : plan_to_exit(s);
                stuck_ = 0;
            }
        }
        break;
    case DrillPhase::Finished:
        if (!submitted_) {
            submitted_ = true;
            out.emplace_back(wire::PostQuestionnaire{script_.questionnaire});
        }
        last_pos_ = pos;
        return out;
    }
    last_pos_ = pos;

    if (cmd.interact || !last_sent_ || !(*last_sent_ == cmd)) {
        out.insert(out.begin(), wire::Input{cmd});
        last_sent_ = cmd;
    }
    return out;
}

std::vector<ServerMessage> run_pilot(Session &session, Pilot &pilot, std::uint64_t max_ticks) {
    std::vector<ServerMessage> out;
    while (!session.sealed() && session.tick_count() < max_ticks) {
        if (pilot.wants_disconnect(session)) {
            session.seal(kSealDisconnected);
            break;
        }
        for (auto &m : pilot.next(session))
            session.receive(std::move(m));
        auto msgs = session.tick();
        out.insert(out.end(), std::make_move_iterator(msgs.begin()), std::make_move_iterator(msgs.end()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Replay

namespace {

std::optional<ClientMessage> message_from_entry(const LogEntry &e) {
    try {
        if (e.kind == kinds::kClientInput)
            return wire::Input{input_from_json(e.payload)};
        if (e.kind == kinds::kClientAnswer) {
            const json &c = e.payload.at("choice");
            if (c.is_null())
                return wire::Answer{std::nullopt};
            auto choice = parse_alarm_choice(c.get<std::string>());
            if (!choice)
                throw ReplayError("bad recorded answer");
            return wire::Answer{*choice};
        }
        if (e.kind == kinds::kClientPost)
            return wire::PostQuestionnaire{meta_from_json(e.payload)};
    } catch (const ReplayError &) {
        throw;
    } catch (const std::exception &ex) {
        throw ReplayError("unreadable " + e.kind + " at t=" + std::to_string(e.t) + ": " + ex.what());
    }
    return std::nullopt;
}

std::vector<std::string> lines_of(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        out.push_back(line);
    return out;
}

} // namespace

ReplayVerdict replay(const SessionLog &log, std::shared_ptr<const FloorPlan> plan, SessionConfig config) {
    const std::string digest = plan_digest(*plan);
    if (log.plan_digest != digest)
        throw ReplayError("plan digest mismatch: log was recorded on " + log.plan_digest + ", plan is " + digest);
    if (log.events.empty() || log.events.front().kind != kinds::kSessionStart)
        throw ReplayError("log does not begin with session_start");
    if (auto hz = log.events.front().payload.find("tick_hz"); hz != log.events.front().payload.end())
        config.tick_hz = hz->get<int>();

    const double hz = config.tick_hz;
    std::map<std::uint64_t, std::vector<ClientMessage>> inbox;
    std::optional<std::string> end_reason;
    std::uint64_t end_tick = 0;
    for (const auto &e : log.events) {
        const auto tick = static_cast<std::uint64_t>(std::llround(e.t * hz));
        end_tick = std::max(end_tick, tick);
        if (auto m = message_from_entry(e))
            inbox[tick].push_back(std::move(*m));
        if (e.kind == kinds::kSessionEnd && e.payload.contains("reason"))
            end_reason = e.payload.at("reason").get<std::string>();
    }

    Session s(plan, log.session_id, log.subject_id, config);
    s.start();
    while (!s.sealed() && s.tick_count() < end_tick) {
        if (auto it = inbox.find(s.tick_count() + 1); it != inbox.end())
            for (const auto &m : it->second)
                s.receive(m);
        s.tick();
    }
    if (!s.sealed() && end_reason)
        s.seal(*end_reason);

    ReplayVerdict v;
    v.replayed = s.log();
    const std::string want = encode(log);
    const std::string got = encode(v.replayed);
    v.match = want == got;
    try {
        v.record = summarize(log);
    } catch (const SummaryError &) {
    }
    if (!v.match) {
        const auto a = lines_of(want);
        const auto b = lines_of(got);
        std::size_t i = 0;
        while (i < a.size() && i < b.size() && a[i] == b[i])
            ++i;
        if (i == 0) {
            v.detail = "header differs";
        } else {
            v.first_divergence = i - 1;
            v.detail = "event " + std::to_string(i - 1) + " differs: recorded " +
                       (i < a.size() ? a[i] : std::string("<end of log>")) + " but replay produced " +
                       (i < b.size() ? b[i] : std::string("<end of log>"));
        }
    }
    return v;
}

} // namespace eva
