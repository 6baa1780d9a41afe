#include "eva/scenario.hpp"
#include "eva/locale.hpp"

#include <limits>

namespace eva {

std::string to_string(DrillPhase p) {
    switch (p) {
    case DrillPhase::Briefing: return "Briefing";
    case DrillPhase::EscortToWard: return "EscortToWard";
    case DrillPhase::AlarmQuestion: return "AlarmQuestion";
    case DrillPhase::Evacuation: return "Evacuation";
    case DrillPhase::Finished: return "Finished";
    }
    return "?";
}

std::optional<DrillPhase> parse_drill_phase(std::string_view s) {
    for (auto p : {DrillPhase::Briefing, DrillPhase::EscortToWard, DrillPhase::AlarmQuestion, DrillPhase::Evacuation,
                   DrillPhase::Finished})
        if (to_string(p) == s)
            return p;
    return std::nullopt;
}

std::string to_string(DrillEventKind k) {
    switch (k) {
    case DrillEventKind::Spawned: return "Spawned";
    case DrillEventKind::ReachedWard: return "ReachedWard";
    case DrillEventKind::AlarmRaised: return "AlarmRaised";
    case DrillEventKind::AnswerGiven: return "AnswerGiven";
    case DrillEventKind::WheelchairGrabbed: return "WheelchairGrabbed";
    case DrillEventKind::WheelchairReleased: return "WheelchairReleased";
    case DrillEventKind::SafeZoneReached: return "SafeZoneReached";
    case DrillEventKind::ExitReached: return "ExitReached";
    case DrillEventKind::Tick: return "Tick";
    }
    return "?";
}

bool is_legal(DrillPhase phase, DrillEventKind kind) {
    using K = DrillEventKind;
    if (kind == K::Tick)
        return true;
    switch (phase) {
    case DrillPhase::Briefing: return kind == K::Spawned;
    case DrillPhase::EscortToWard:
        return kind == K::ReachedWard || kind == K::AlarmRaised || kind == K::WheelchairGrabbed ||
               kind == K::WheelchairReleased;
    case DrillPhase::AlarmQuestion: return kind == K::AnswerGiven;
    case DrillPhase::Evacuation:
        return kind == K::WheelchairGrabbed || kind == K::WheelchairReleased || kind == K::SafeZoneReached ||
               kind == K::ExitReached;
    case DrillPhase::Finished: return false;
    }
    return false;
}

namespace {

LogEntry entry(double t, const char *kind, nlohmann::json payload = nlohmann::json::object()) {
    return LogEntry{t, kind, std::move(payload)};
}

// Fixes the rescue decision the first time a safe place is reached.
void decide_rescue(ScenarioState &s, double t, std::vector<LogEntry> &out) {
    if (s.rescue_decided)
        return;
    s.rescue_decided = true;
    if (s.pushing) {
        s.rescued = true;
        s.rescue_t = t;
        s.greeting_shown = true;
        out.push_back(entry(t, kinds::kGreeting, {{"text", locale().greeting}}));
    }
}

} // namespace

AdvanceResult advance(const ScenarioState &state, const DrillEvent &event) {
    AdvanceResult r{state, {}};
    ScenarioState &s = r.state;
    const double t = event.t;
    const DrillEventKind kind = event.kind();

    if (!is_legal(state.phase, kind)) {
        r.emitted.push_back(entry(t, kinds::kWarning, {{"ignored", to_string(kind)}, {"phase", to_string(state.phase)}}));
        return r;
    }

    std::visit(
        [&](const auto &e) {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, drill::Spawned>) {
                s.phase = DrillPhase::EscortToWard;
                s.pushing = true;
                r.emitted.push_back(entry(t, kinds::kSpawned));
            } else if constexpr (std::is_same_v<E, drill::ReachedWard>) {
                s.phase = DrillPhase::AlarmQuestion;
                s.alarm_t = t;
                r.emitted.push_back(entry(t, kinds::kReachedWard));
                r.emitted.push_back(entry(t, kinds::kAlarmRaised));
            } else if constexpr (std::is_same_v<E, drill::AlarmRaised>) {
                s.phase = DrillPhase::AlarmQuestion;
                s.alarm_t = t;
                r.emitted.push_back(entry(t, kinds::kAlarmRaised));
            } else if constexpr (std::is_same_v<E, drill::AnswerGiven>) {
                s.phase = DrillPhase::Evacuation;
                s.answer = e.choice;
                s.answer_t = t;
                r.emitted.push_back(entry(t, kinds::kAnswerGiven, {{"choice", e.choice ? nlohmann::json(to_string(*e.choice)) : nlohmann::json()}}));
                r.emitted.push_back(entry(t, kinds::kInstruction, {{"text", locale().instruction}}));
            } else if constexpr (std::is_same_v<E, drill::WheelchairGrabbed>) {
                s.pushing = true;
                r.emitted.push_back(entry(t, kinds::kWheelchairGrabbed));
            } else if constexpr (std::is_same_v<E, drill::WheelchairReleased>) {
                s.pushing = false;
                r.emitted.push_back(entry(t, kinds::kWheelchairReleased));
            } else if constexpr (std::is_same_v<E, drill::SafeZoneReached>) {
                r.emitted.push_back(entry(t, kinds::kSafeZoneReached, {{"zone", e.zone}}));
                decide_rescue(s, t, r.emitted);
            } else if constexpr (std::is_same_v<E, drill::ExitReached>) {
                r.emitted.push_back(entry(t, kinds::kExitReached, {{"exit", to_string(e.label)}}));
                decide_rescue(s, t, r.emitted);
                s.phase = DrillPhase::Finished;
                s.exit_label = e.label;
                s.end_t = t;
            }
        },
        event.what);
    return r;
}

std::optional<DrillEvent> event_from_entry(const LogEntry &e) {
    const double t = e.t;
    const std::string &k = e.kind;
    auto str = [&](const char *key) -> std::string {
        if (!e.payload.is_object() || !e.payload.contains(key) || !e.payload.at(key).is_string())
            return {};
        return e.payload.at(key).get<std::string>();
    };
    if (k == kinds::kSpawned)
        return DrillEvent{t, drill::Spawned{}};
    if (k == kinds::kReachedWard)
        return DrillEvent{t, drill::ReachedWard{}};
    if (k == kinds::kAlarmRaised)
        return DrillEvent{t, drill::AlarmRaised{}};
    if (k == kinds::kAnswerGiven) {
        if (e.payload.is_object() && e.payload.contains("choice") && e.payload.at("choice").is_null())
            return DrillEvent{t, drill::AnswerGiven{std::nullopt}};
        auto c = parse_alarm_choice(str("choice"));
        return c ? std::optional<DrillEvent>(DrillEvent{t, drill::AnswerGiven{*c}}) : std::nullopt;
    }
    if (k == kinds::kWheelchairGrabbed)
        return DrillEvent{t, drill::WheelchairGrabbed{}};
    if (k == kinds::kWheelchairReleased)
        return DrillEvent{t, drill::WheelchairReleased{}};
    if (k == kinds::kSafeZoneReached)
        return DrillEvent{t, drill::SafeZoneReached{str("zone")}};
    if (k == kinds::kExitReached) {
        auto l = parse_exit_label(str("exit"));
        return l ? std::optional<DrillEvent>(DrillEvent{t, drill::ExitReached{*l}}) : std::nullopt;
    }
    return std::nullopt;
}

std::array<AlarmOption, 4> alarm_question() {
    const auto &text = locale();
    std::array<AlarmOption, 4> out;
    for (AlarmChoice c : kAlarmChoices)
        out[index_of(c)] = {c, text.alarm_options[index_of(c)]};
    return out;
}

std::optional<std::size_t> safe_zone_at(const FloorPlan &plan, Vec2 pos) {
    for (std::size_t i = 0; i < plan.safe_zones.size(); ++i)
        if (point_in_convex_polygon(plan.safe_zones[i].polygon, pos))
            return i;
    return std::nullopt;
}

bool in_safe_zone(const FloorPlan &plan, Vec2 pos) { return safe_zone_at(plan, pos).has_value(); }

std::optional<ExitLabel> exit_hit(const FloorPlan &plan, Vec2 prev, Vec2 next) {
    std::optional<ExitLabel> best;
    double best_t = std::numeric_limits<double>::infinity();
    for (const auto &e : plan.exits) {
        auto t = segment_intersection({prev, next}, e.segment);
        if (t && *t < best_t) {
            best_t = *t;
            best = e.label;
        }
    }
    return best;
}

Vec2 point_beyond_exit(const FloorPlan &plan, ExitLabel label, Vec2 from, double overshoot) {
    const Exit *e = plan.find_exit(label);
    if (!e)
        throw std::invalid_argument("plan has no exit " + to_string(label));
    const Vec2 mid = (e->segment.a + e->segment.b) * 0.5;
    const Vec2 d = normalized(e->segment.b - e->segment.a);
    Vec2 n{-d.y, d.x};
    if (dot(n, mid - from) < 0.0)
        n = n * -1.0;
    return mid + n * overshoot;
}

} // namespace eva
