#include "eva/floorplan.hpp"
#include "eva/json_lines.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace eva {

using nlohmann::json;

PlanSyntaxError::PlanSyntaxError(std::size_t line, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string join_violations(const std::vector<std::string> &v) {
    std::string out = "invalid floorplan";
    for (const auto &s : v)
        out += "\n  - " + s;
    return out;
}

} // namespace

PlanSemanticError::PlanSemanticError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

const Exit *FloorPlan::find_exit(ExitLabel label) const {
    auto it = std::ranges::find(exits, label, &Exit::label);
    return it == exits.end() ? nullptr : &*it;
}

std::optional<std::size_t> FloorPlan::door_index(std::string_view id) const {
    for (std::size_t i = 0; i < doors.size(); ++i)
        if (doors[i].id == id)
            return i;
    return std::nullopt;
}

std::optional<std::size_t> FloorPlan::sign_index(std::string_view id) const {
    for (std::size_t i = 0; i < signage.size(); ++i)
        if (signage[i].id == id)
            return i;
    return std::nullopt;
}

Vec2 FloorPlan::waypoint(std::string_view wp) const {
    auto it = waypoints.find(std::string(wp));
    if (it == waypoints.end())
        throw std::out_of_range("floorplan has no waypoint " + std::string(wp));
    return it->second;
}

Box FloorPlan::bounds() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Box b{{inf, inf}, {-inf, -inf}};
    auto add = [&](Vec2 p) {
        b.min.x = std::min(b.min.x, p.x);
        b.min.y = std::min(b.min.y, p.y);
        b.max.x = std::max(b.max.x, p.x);
        b.max.y = std::max(b.max.y, p.y);
    };
    for (const auto &w : walls) {
        add(w.a);
        add(w.b);
    }
    for (const auto &d : doors) {
        add(d.segment.a);
        add(d.segment.b);
    }
    for (const auto &e : exits) {
        add(e.segment.a);
        add(e.segment.b);
    }
    for (const auto &[_, p] : waypoints)
        add(p);
    for (const auto &z : safe_zones)
        for (Vec2 p : z.polygon)
            add(p);
    for (const auto &s : signage)
        add(s.at);
    if (b.min.x > b.max.x)
        return Box{};
    return b;
}

namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    [[noreturn]] void fail(const std::string &pointer, const std::string &what) const {
        throw PlanSyntaxError(line_of_pointer(text_, pointer), what + " at " + (pointer.empty() ? "/" : pointer));
    }

    const json &member(const json &obj, const std::string &ptr, const char *key) const {
        if (!obj.contains(key))
            fail(ptr, std::string("missing key '") + key + "'");
        return obj.at(key);
    }

    double number(const json &j, const std::string &ptr) const {
        if (!j.is_number())
            fail(ptr, "expected a number");
        return j.get<double>();
    }

    std::string string(const json &j, const std::string &ptr) const {
        if (!j.is_string())
            fail(ptr, "expected a string");
        return j.get<std::string>();
    }

    bool boolean(const json &j, const std::string &ptr) const {
        if (!j.is_boolean())
            fail(ptr, "expected true or false");
        return j.get<bool>();
    }

    const json &array(const json &j, const std::string &ptr) const {
        if (!j.is_array())
            fail(ptr, "expected an array");
        return j;
    }

    const json &object(const json &j, const std::string &ptr) const {
        if (!j.is_object())
            fail(ptr, "expected an object");
        return j;
    }

    Vec2 point(const json &j, const std::string &ptr) const {
        if (!j.is_array() || j.size() != 2)
            fail(ptr, "expected a point [x, y]");
        return {number(j[0], ptr + "/0"), number(j[1], ptr + "/1")};
    }

    Segment segment(const json &j, const std::string &ptr) const {
        if (!j.is_array() || j.size() != 2)
            fail(ptr, "expected a segment [[x, y], [x, y]]");
        return {point(j[0], ptr + "/0"), point(j[1], ptr + "/1")};
    }

private:
    std::string_view text_;
};

std::string idx(const std::string &base, std::size_t i) { return base + "/" + std::to_string(i); }

} // namespace

FloorPlan parse_floorplan_unchecked(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error &e) {
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        throw PlanSyntaxError(line_at_offset(text, offset), e.what());
    }

    const Reader r(text);
    r.object(doc, "");
    static const std::set<std::string> known{"name", "walls", "doors", "exits", "waypoints", "safe_zones", "signage"};
    for (const auto &[key, _] : doc.items())
        if (!known.contains(key))
            r.fail("/" + key, "unknown key '" + key + "'");

    FloorPlan plan;
    plan.name = r.string(r.member(doc, "", "name"), "/name");

    const auto &walls = r.array(r.member(doc, "", "walls"), "/walls");
    for (std::size_t i = 0; i < walls.size(); ++i)
        plan.walls.push_back(r.segment(walls[i], idx("/walls", i)));

    const auto &doors = r.array(r.member(doc, "", "doors"), "/doors");
    for (std::size_t i = 0; i < doors.size(); ++i) {
        const std::string p = idx("/doors", i);
        const auto &d = r.object(doors[i], p);
        Door door;
        door.id = r.string(r.member(d, p, "id"), p + "/id");
        door.segment = r.segment(r.member(d, p, "segment"), p + "/segment");
        if (d.contains("initially_open"))
            door.initially_open = r.boolean(d.at("initially_open"), p + "/initially_open");
        plan.doors.push_back(std::move(door));
    }

    const auto &exits = r.array(r.member(doc, "", "exits"), "/exits");
    for (std::size_t i = 0; i < exits.size(); ++i) {
        const std::string p = idx("/exits", i);
        const auto &e = r.object(exits[i], p);
        const std::string label = r.string(r.member(e, p, "label"), p + "/label");
        auto parsed = parse_exit_label(label);
        if (!parsed)
            throw PlanSemanticError({"unknown exit label '" + label + "' (expected A, B, C or D)"});
        plan.exits.push_back(Exit{*parsed, r.segment(r.member(e, p, "segment"), p + "/segment")});
    }

    const auto &wps = r.object(r.member(doc, "", "waypoints"), "/waypoints");
    for (const auto &[name, value] : wps.items())
        plan.waypoints[name] = r.point(value, "/waypoints/" + name);

    const auto &zones = r.array(r.member(doc, "", "safe_zones"), "/safe_zones");
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const std::string p = idx("/safe_zones", i);
        const auto &z = r.object(zones[i], p);
        SafeZone zone;
        zone.label = r.string(r.member(z, p, "label"), p + "/label");
        const auto &poly = r.array(r.member(z, p, "polygon"), p + "/polygon");
        for (std::size_t k = 0; k < poly.size(); ++k)
            zone.polygon.push_back(r.point(poly[k], idx(p + "/polygon", k)));
        plan.safe_zones.push_back(std::move(zone));
    }

    const auto &signs = r.array(r.member(doc, "", "signage"), "/signage");
    for (std::size_t i = 0; i < signs.size(); ++i) {
        const std::string p = idx("/signage", i);
        const auto &s = r.object(signs[i], p);
        SignNode node;
        node.id = r.string(r.member(s, p, "id"), p + "/id");
        node.at = r.point(r.member(s, p, "at"), p + "/at");
        if (s.contains("next") && !s.at("next").is_null())
            node.next = r.string(s.at("next"), p + "/next");
        if (s.contains("exit") && !s.at("exit").is_null()) {
            const std::string label = r.string(s.at("exit"), p + "/exit");
            node.exit = parse_exit_label(label);
            if (!node.exit)
                throw PlanSemanticError({"sign '" + node.id + "' points to unknown exit label '" + label + "'"});
        }
        plan.signage.push_back(std::move(node));
    }
    return plan;
}

std::vector<std::string> check_floorplan(const FloorPlan &plan) {
    std::vector<std::string> v;

    auto finite_seg = [](const Segment &s) { return is_finite(s.a) && is_finite(s.b); };
    for (std::size_t i = 0; i < plan.walls.size(); ++i)
        if (!finite_seg(plan.walls[i]))
            v.push_back("wall " + std::to_string(i) + " has a non-finite coordinate");

    std::set<std::string> door_ids;
    for (const auto &d : plan.doors) {
        if (!door_ids.insert(d.id).second)
            v.push_back("duplicate door id '" + d.id + "'");
        if (!finite_seg(d.segment))
            v.push_back("door '" + d.id + "' has a non-finite coordinate");
    }

    std::set<ExitLabel> labels;
    for (const auto &e : plan.exits) {
        if (!labels.insert(e.label).second)
            v.push_back("duplicate exit label " + to_string(e.label));
        if (!finite_seg(e.segment))
            v.push_back("exit " + to_string(e.label) + " has a non-finite coordinate");
    }

    for (auto wp : kRequiredWaypoints)
        if (!plan.waypoints.contains(std::string(wp)))
            v.push_back("missing waypoint " + std::string(wp));
    for (const auto &[name, p] : plan.waypoints) {
        if (std::ranges::find(kRequiredWaypoints, name) == kRequiredWaypoints.end())
            v.push_back("unknown waypoint " + name);
        if (!is_finite(p))
            v.push_back("waypoint " + name + " has a non-finite coordinate");
    }

    for (const auto &z : plan.safe_zones) {
        if (!std::ranges::all_of(z.polygon, is_finite))
            v.push_back("safe zone '" + z.label + "' has a non-finite coordinate");
        else if (!is_convex(z.polygon))
            v.push_back("safe zone '" + z.label + "' is not a convex polygon");
    }

    std::set<std::string> sign_ids;
    for (const auto &s : plan.signage) {
        if (!sign_ids.insert(s.id).second)
            v.push_back("duplicate sign id '" + s.id + "'");
        if (!is_finite(s.at))
            v.push_back("sign '" + s.id + "' has a non-finite coordinate");
        if (s.next && s.exit)
            v.push_back("sign '" + s.id + "' points to both a sign and an exit");
        if (!s.next && !s.exit)
            v.push_back("sign '" + s.id + "' points to no successor and no exit");
        if (s.next && !plan.sign_index(*s.next))
            v.push_back("sign '" + s.id + "' points to unknown sign '" + *s.next + "'");
        if (s.exit && !plan.find_exit(*s.exit))
            v.push_back("sign '" + s.id + "' points to missing exit " + to_string(*s.exit));
    }
    // Every chain has out-degree one, so a chain either reaches an exit or cycles.
    for (std::size_t i = 0; i < plan.signage.size(); ++i) {
        std::size_t cur = i;
        bool ok = false;
        for (std::size_t steps = 0; steps <= plan.signage.size(); ++steps) {
            const auto &node = plan.signage[cur];
            if (node.exit) {
                ok = plan.find_exit(*node.exit) != nullptr;
                break;
            }
            if (!node.next)
                break;
            auto nxt = plan.sign_index(*node.next);
            if (!nxt)
                break;
            cur = *nxt;
        }
        if (!ok && plan.signage[i].next && plan.sign_index(*plan.signage[i].next))
            v.push_back("signage path from '" + plan.signage[i].id + "' never reaches an exit");
    }
    return v;
}

FloorPlan parse_floorplan(std::string_view text) {
    FloorPlan plan = parse_floorplan_unchecked(text);
    auto violations = check_floorplan(plan);
    if (!violations.empty())
        throw PlanSemanticError(std::move(violations));
    return plan;
}

FloorPlan load_floorplan(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open floorplan " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_floorplan(ss.str());
}

json to_json(const FloorPlan &plan) {
    auto pt = [](Vec2 p) { return json::array({p.x, p.y}); };
    auto seg = [&](const Segment &s) { return json::array({pt(s.a), pt(s.b)}); };

    json j;
    j["name"] = plan.name;
    j["walls"] = json::array();
    for (const auto &w : plan.walls)
        j["walls"].push_back(seg(w));
    j["doors"] = json::array();
    for (const auto &d : plan.doors)
        j["doors"].push_back({{"id", d.id}, {"segment", seg(d.segment)}, {"initially_open", d.initially_open}});
    j["exits"] = json::array();
    for (const auto &e : plan.exits)
        j["exits"].push_back({{"label", to_string(e.label)}, {"segment", seg(e.segment)}});
    j["waypoints"] = json::object();
    for (const auto &[name, p] : plan.waypoints)
        j["waypoints"][name] = pt(p);
    j["safe_zones"] = json::array();
    for (const auto &z : plan.safe_zones) {
        json poly = json::array();
        for (Vec2 p : z.polygon)
            poly.push_back(pt(p));
        j["safe_zones"].push_back({{"label", z.label}, {"polygon", poly}});
    }
    j["signage"] = json::array();
    for (const auto &s : plan.signage) {
        json node = {{"id", s.id}, {"at", pt(s.at)}};
        if (s.next)
            node["next"] = *s.next;
        if (s.exit)
            node["exit"] = to_string(*s.exit);
        j["signage"].push_back(node);
    }
    return j;
}

std::string plan_digest(const FloorPlan &plan) {
    const std::string canonical = to_json(plan).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace eva
