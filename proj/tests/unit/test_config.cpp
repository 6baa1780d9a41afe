#include "eva/config.hpp"

#include "../support/paths.hpp"

#include <doctest.h>

using namespace eva;

TEST_CASE("bundled run.ini holds the defaults") {
    const RunConfig c = load_run_config(testpaths::repo("configs/run.ini"));
    CHECK(c.plan == "data/plans/eva_building.json");
    CHECK(c.seed == 0x5eedu);
    CHECK(c.logs == "logs");
    CHECK(c.out == "sim_out");
    const DynamicsParams d;
    for (const auto &name : dynamics_field_names()) {
        CAPTURE(name);
        CHECK(get_dynamics_field(c.dynamics, name) == get_dynamics_field(d, name));
    }
    CHECK(dynamics_field_names().size() == 11);
}

TEST_CASE("overrides and errors") {
    const RunConfig c = parse_run_config("[run]\nseed = 18446744073709551615\n[dynamics]\ntau = 0.75\ndt = 0.01\n");
    CHECK(c.seed == 18446744073709551615ull);
    CHECK(c.dynamics.tau == 0.75);
    CHECK(c.dynamics.dt == 0.01);
    CHECK_FALSE(c.plan);

    CHECK_THROWS_AS(parse_run_config("[dynamics]\nmass = 80\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[dynamics]\ntau = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[dynamics]\ntau = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[weather]\nrain = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[run\n"), ConfigError);
    CHECK_THROWS(load_run_config("/nonexistent/run.ini"));

    DynamicsParams p;
    set_dynamics_field(p, "radius", 0.3);
    CHECK(p.radius == 0.3);
    CHECK_THROWS_AS(set_dynamics_field(p, "speed", 1), ConfigError);
}

TEST_CASE("seeds parse as full 64-bit values") {
    CHECK(parse_seed("0") == 0u);
    CHECK(parse_seed("42") == 42u);
    CHECK(parse_seed("0x5eed") == 0x5eedu);
    CHECK(parse_seed("0xFFFFFFFFFFFFFFFF") == ~0ull);
    CHECK_THROWS(parse_seed(""));
    CHECK_THROWS(parse_seed("-1"));
    CHECK_THROWS(parse_seed("12abc"));
    CHECK_THROWS(parse_seed("18446744073709551616"));
}
