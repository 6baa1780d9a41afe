// Regenerates the bundled 20-subject sample by playing scripted sessions
// through the real server core. Categorical marginals are fixed; columns are
// paired by independent seeded shuffles; times are synthetic.
#include "eva/session.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

namespace fs = std::filesystem;
using namespace eva;

namespace {

// Fisher-Yates with an explicit modulus so the result is the same on every
// standard library (std::shuffle is not).
template <class T> void shuffle(std::vector<T> &v, std::mt19937_64 &rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng() % i]);
}

std::vector<bool> column(std::size_t yes, std::size_t no, std::mt19937_64 &rng) {
    std::vector<bool> v(yes, true);
    v.insert(v.end(), no, false);
    shuffle(v, rng);
    return v;
}

template <class T> std::vector<T> repeat(std::initializer_list<std::pair<T, std::size_t>> counts, std::mt19937_64 &rng) {
    std::vector<T> v;
    for (const auto &[value, n] : counts)
        v.insert(v.end(), n, value);
    shuffle(v, rng);
    return v;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"write the synthetic 20-subject sample dataset", "synth_sample"};
    std::string plan_path = "data/plans/eva_building.json", out = "data/sample";
    std::uint64_t seed = 20;
    app.add_option("--plan", plan_path, "floorplan JSON")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory (must not hold a registry yet)");
    app.add_option("--seed", seed, "shuffle seed");
    CLI11_PARSE(app, argc, argv);

    constexpr std::size_t n = 20;
    std::mt19937_64 rng(seed);

    const auto gamer = column(13, 7, rng);
    const auto training = column(9, 11, rng);
    const auto drill = column(12, 8, rng);
    const auto real_fire = column(1, 19, rng);
    const auto signage = column(16, 4, rng);
    const auto rescue = column(10, 10, rng);
    using Answer = std::optional<AlarmChoice>;
    const auto answers = repeat<Answer>(
        {{AlarmChoice::A, 1}, {AlarmChoice::B, 1}, {AlarmChoice::C, 8}, {AlarmChoice::D, 9}, {std::nullopt, 1}}, rng);
    const auto exits =
        repeat<ExitLabel>({{ExitLabel::A, 4}, {ExitLabel::B, 10}, {ExitLabel::C, 1}, {ExitLabel::D, 5}}, rng);

    if (fs::exists(fs::path(out) / "subjects.registry")) {
        std::cerr << "synth_sample: " << out << " already has a registry; remove it first\n";
        return 2;
    }
    auto plan = std::make_shared<const FloorPlan>(load_floorplan(plan_path));
    SessionHost host(plan, out);

    for (std::size_t i = 0; i < n; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "P%02zu", i + 1);
        auto created = host.create(id);
        if (!created.session) {
            std::cerr << "synth_sample: " << id << " rejected\n";
            return 2;
        }
        PilotScript ps;
        ps.answer = answers[i];
        ps.answer_delay_ticks = 20 + static_cast<int>(rng() % 200);
        ps.exit = exits[i];
        ps.rescue = rescue[i];
        ps.fumble_tick = (rng() % 4 == 0) ? 15 + static_cast<int>(rng() % 40) : -1;
        ps.questionnaire = SubjectMeta{gamer[i], training[i], drill[i], real_fire[i], signage[i]};

        Session &s = *created.session;
        s.start();
        Pilot pilot(ps);
        run_pilot(s, pilot);
        if (!s.sealed()) {
            std::cerr << "synth_sample: " << id << " did not finish\n";
            return 2;
        }
        std::cout << host.close(s, kSealCompleted) << "\n";
    }
}
