#include "eva/wire.hpp"

#include <cmath>

namespace eva {

using nlohmann::json;

bool wire::Question::operator==(const Question &o) const {
    if (options.size() != o.options.size())
        return false;
    for (std::size_t i = 0; i < options.size(); ++i)
        if (options[i].choice != o.options[i].choice || options[i].text != o.options[i].text)
            return false;
    return true;
}

namespace {

template <class... F> struct overloaded : F... {
    using F::operator()...;
};
template <class... F> overloaded(F...) -> overloaded<F...>;

const json &field(const json &j, const char *key) {
    if (!j.contains(key))
        throw WireError(std::string("missing field '") + key + "'");
    return j.at(key);
}

bool flag(const json &j, const char *key) {
    const json &v = field(j, key);
    if (!v.is_boolean())
        throw WireError(std::string("field '") + key + "' must be a boolean");
    return v.get<bool>();
}

bool flag_or(const json &j, const char *key, bool fallback) {
    return j.contains(key) ? flag(j, key) : fallback;
}

double number(const json &j, const char *key) {
    const json &v = field(j, key);
    if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw WireError(std::string("field '") + key + "' must be a finite number");
    return v.get<double>();
}

std::string text(const json &j, const char *key) {
    const json &v = field(j, key);
    if (!v.is_string())
        throw WireError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

json point(Vec2 p) { return json::array({p.x, p.y}); }

Vec2 point_from(const json &j, const char *key) {
    const json &v = field(j, key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw WireError(std::string("field '") + key + "' must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

json parse_object(std::string_view frame) {
    json j;
    try {
        j = json::parse(frame.begin(), frame.end());
    } catch (const json::parse_error &e) {
        throw WireError(std::string("malformed frame: ") + e.what());
    }
    if (!j.is_object())
        throw WireError("frame must be a JSON object");
    return j;
}

} // namespace

json input_to_json(const InputCommand &c) {
    return {{"forward", c.forward}, {"back", c.back},       {"left", c.left},
            {"right", c.right},     {"look_yaw", c.look_yaw}, {"interact", c.interact}};
}

InputCommand input_from_json(const json &j) {
    if (!j.is_object())
        throw WireError("input must be an object");
    InputCommand c;
    c.forward = flag_or(j, "forward", false);
    c.back = flag_or(j, "back", false);
    c.left = flag_or(j, "left", false);
    c.right = flag_or(j, "right", false);
    c.interact = flag_or(j, "interact", false);
    c.look_yaw = j.contains("look_yaw") ? number(j, "look_yaw") : 0.0;
    return c;
}

json meta_to_json(const SubjectMeta &m) {
    return {{"is_gamer", m.is_gamer},
            {"fire_training", m.fire_training},
            {"drill_experience", m.drill_experience},
            {"real_fire_experience", m.real_fire_experience},
            {"followed_signage", m.followed_signage}};
}

SubjectMeta meta_from_json(const json &j) {
    if (!j.is_object())
        throw WireError("answers must be an object");
    SubjectMeta m;
    m.is_gamer = flag(j, "is_gamer");
    m.fire_training = flag(j, "fire_training");
    m.drill_experience = flag(j, "drill_experience");
    m.real_fire_experience = flag(j, "real_fire_experience");
    m.followed_signage = flag(j, "followed_signage");
    return m;
}

json to_json(const ClientMessage &m) {
    return std::visit(
        overloaded{
            [](const wire::Hello &h) { return json{{"type", "hello"}, {"subject_id", h.subject_id}}; },
            [](const wire::Input &i) { return json{{"type", "input"}, {"command", input_to_json(i.command)}}; },
            [](const wire::Answer &a) {
                return json{{"type", "answer"}, {"choice", a.choice ? json(to_string(*a.choice)) : json()}};
            },
            [](const wire::PostQuestionnaire &p) {
                return json{{"type", "post_questionnaire"}, {"answers", meta_to_json(p.answers)}};
            },
        },
        m);
}

ClientMessage parse_client_message(std::string_view frame) {
    const json j = parse_object(frame);
    const std::string type = text(j, "type");
    if (type == "hello") {
        std::string id = text(j, "subject_id");
        if (id.empty())
            throw WireError("subject_id must not be empty");
        return wire::Hello{std::move(id)};
    }
    if (type == "input")
        return wire::Input{input_from_json(field(j, "command"))};
    if (type == "answer") {
        const json &c = field(j, "choice");
        if (c.is_null())
            return wire::Answer{std::nullopt};
        auto choice = c.is_string() ? parse_alarm_choice(c.get<std::string>()) : std::nullopt;
        if (!choice)
            throw WireError("choice must be one of a, b, c, d or null");
        return wire::Answer{*choice};
    }
    if (type == "post_questionnaire")
        return wire::PostQuestionnaire{meta_from_json(field(j, "answers"))};
    throw WireError("unknown client message type '" + type + "'");
}

json to_json(const ServerMessage &m) {
    return std::visit(
        overloaded{
            [](const wire::Welcome &w) {
                return json{{"type", "welcome"},        {"session_id", w.session_id}, {"subject_id", w.subject_id},
                            {"plan_digest", w.plan_digest}, {"plan", w.plan},           {"tick_hz", w.tick_hz}};
            },
            [](const wire::Snapshot &s) {
                json doors = json::array();
                for (const auto &d : s.doors)
                    doors.push_back({{"id", d.id}, {"open", d.open}});
                return json{{"type", "snapshot"},
                            {"seq", s.seq},
                            {"t", s.t},
                            {"phase", to_string(s.phase)},
                            {"avatar", {{"position", point(s.avatar)}, {"heading", s.heading}}},
                            {"wheelchair", {{"position", point(s.wheelchair)}, {"attached", s.attached}}},
                            {"doors", doors}};
            },
            [](const wire::Question &q) {
                json opts = json::array();
                for (const auto &o : q.options)
                    opts.push_back({{"choice", to_string(o.choice)}, {"text", o.text}});
                return json{{"type", "question"}, {"options", opts}};
            },
            [](const wire::Instruction &i) { return json{{"type", "instruction"}, {"text", i.text}}; },
            [](const wire::Greeting &g) { return json{{"type", "greeting"}, {"text", g.text}}; },
            [](const wire::Finished &f) {
                return json{{"type", "finished"},
                            {"exit", to_string(f.exit)},
                            {"total_time_s", f.total_time_s},
                            {"questions", f.questions}};
            },
            [](const wire::Rejected &r) { return json{{"type", "rejected"}, {"reason", r.reason}}; },
            [](const wire::Sealed &s) { return json{{"type", "sealed"}, {"session_id", s.session_id}}; },
        },
        m);
}

ServerMessage parse_server_message(std::string_view frame) {
    const json j = parse_object(frame);
    const std::string type = text(j, "type");
    try {
        if (type == "welcome")
            return wire::Welcome{text(j, "session_id"), text(j, "subject_id"), text(j, "plan_digest"),
                                 field(j, "plan"), number(j, "tick_hz")};
        if (type == "snapshot") {
            wire::Snapshot s;
            s.seq = field(j, "seq").get<std::uint64_t>();
            s.t = number(j, "t");
            auto phase = parse_drill_phase(text(j, "phase"));
            if (!phase)
                throw WireError("unknown phase");
            s.phase = *phase;
            s.avatar = point_from(field(j, "avatar"), "position");
            s.heading = number(field(j, "avatar"), "heading");
            s.wheelchair = point_from(field(j, "wheelchair"), "position");
            s.attached = flag(field(j, "wheelchair"), "attached");
            for (const auto &d : field(j, "doors"))
                s.doors.push_back({text(d, "id"), flag(d, "open")});
            return s;
        }
        if (type == "question") {
            wire::Question q;
            for (const auto &o : field(j, "options")) {
                auto c = parse_alarm_choice(text(o, "choice"));
                if (!c)
                    throw WireError("bad option choice");
                q.options.push_back({*c, text(o, "text")});
            }
            return q;
        }
        if (type == "instruction")
            return wire::Instruction{text(j, "text")};
        if (type == "greeting")
            return wire::Greeting{text(j, "text")};
        if (type == "finished") {
            auto label = parse_exit_label(text(j, "exit"));
            if (!label)
                throw WireError("bad exit label");
            return wire::Finished{*label, number(j, "total_time_s"),
                                  field(j, "questions").get<std::vector<std::string>>()};
        }
        if (type == "rejected")
            return wire::Rejected{text(j, "reason")};
        if (type == "sealed")
            return wire::Sealed{text(j, "session_id")};
    } catch (const json::exception &e) {
        throw WireError(std::string("bad ") + type + " frame: " + e.what());
    }
    throw WireError("unknown server message type '" + type + "'");
}

std::string encode_frame(const ClientMessage &m) { return to_json(m).dump(); }
std::string encode_frame(const ServerMessage &m) { return to_json(m).dump(); }

} // namespace eva
