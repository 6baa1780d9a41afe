#include "eva/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace eva {

namespace pt = boost::property_tree;

namespace {

struct Field {
    const char *name;
    double DynamicsParams::*member;
};

constexpr Field kFields[] = {
    {"tau", &DynamicsParams::tau},
    {"a_agent", &DynamicsParams::a_agent},
    {"b_agent", &DynamicsParams::b_agent},
    {"a_wall", &DynamicsParams::a_wall},
    {"b_wall", &DynamicsParams::b_wall},
    {"dt", &DynamicsParams::dt},
    {"speed_cap_factor", &DynamicsParams::speed_cap_factor},
    {"radius", &DynamicsParams::radius},
    {"desired_speed", &DynamicsParams::desired_speed},
    {"wheelchair_factor", &DynamicsParams::wheelchair_factor},
    {"neighbor_radius", &DynamicsParams::neighbor_radius},
};

const Field &field(std::string_view name) {
    for (const auto &f : kFields)
        if (name == f.name)
            return f;
    throw ConfigError("unknown dynamics parameter '" + std::string(name) + "'");
}

double to_double(const std::string &s, const std::string &what) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(what + ": '" + s + "' is not a number");
    return v;
}

} // namespace

const std::vector<std::string> &dynamics_field_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto &f : kFields)
            out.emplace_back(f.name);
        return out;
    }();
    return names;
}

void set_dynamics_field(DynamicsParams &params, std::string_view name, double value) {
    params.*(field(name).member) = value;
}

double get_dynamics_field(const DynamicsParams &params, std::string_view name) {
    return params.*(field(name).member);
}

std::uint64_t parse_seed(std::string_view text) {
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
        base = 16;
    }
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
    if (text.empty() || ec != std::errc() || p != text.data() + text.size())
        throw ConfigError("seed must be an unsigned 64-bit integer, got '" + std::string(text) + "'");
    return v;
}

RunConfig parse_run_config(std::string_view ini) {
    pt::ptree tree;
    std::istringstream in{std::string(ini)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error &e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }

    RunConfig c;
    for (const auto &[section, body] : tree) {
        if (section == "dynamics") {
            for (const auto &[key, v] : body)
                set_dynamics_field(c.dynamics, key, to_double(v.data(), "dynamics." + key));
        } else if (section == "run") {
            for (const auto &[key, v] : body) {
                const std::string &s = v.data();
                if (key == "plan")
                    c.plan = s;
                else if (key == "seed")
                    c.seed = parse_seed(s);
                else if (key == "logs")
                    c.logs = s;
                else if (key == "out")
                    c.out = s;
                else
                    throw ConfigError("unknown key run." + key);
            }
        } else {
            throw ConfigError("unknown config section [" + section + "]");
        }
    }
    try {
        c.dynamics.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return c;
}

RunConfig load_run_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

} // namespace eva
