#pragma once

#include "eva/dynamics.hpp"
#include "eva/floorplan.hpp"
#include "eva/labels.hpp"
#include "eva/telemetry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eva {

/// Pre-evacuation delay in seconds, lognormal in (mu, sigma) of log-seconds.
struct DelayModel {
    std::string family = "lognormal";
    double mu = 2.70805020110221; // ln 15
    double sigma = 0.6;

    double median() const;
    bool operator==(const DelayModel &) const = default;
};

struct BehaviorProfile {
    /// Probabilities of answers a..d. Any shortfall below 1 is the chance of
    /// dismissing the question without a choice.
    std::array<double, 4> alarm_dist{0.25, 0.25, 0.25, 0.25};
    std::array<double, 4> exit_dist{0.25, 0.25, 0.25, 0.25};
    double p_signage = 0.5;
    /// Not constrained by any published count; 0.5 unless fitted.
    double p_rescue = 0.5;
    DelayModel pre_evac_delay;

    /// Throws ProfileError when exit_dist does not sum to 1 (+-1e-9), alarm_dist
    /// sums above 1, or a probability leaves [0, 1].
    void validate() const;
    bool operator==(const BehaviorProfile &) const = default;
};

class ProfileError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FitOptions {
    /// Additive (Laplace) smoothing for the categorical fields. Zero keeps the
    /// empirical frequencies exact.
    double laplace_alpha = 0.0;
};

/// Empirical relative frequencies. The delay is fitted from the positive
/// pre-evacuation times (log-mean and log-sd, sd floored at 0.1) when at least
/// two are available; otherwise the default placeholder is kept.
BehaviorProfile fit_profile(std::span<const DecisionRecord> records, const FitOptions &options = {});

nlohmann::json profile_to_json(const BehaviorProfile &p);
BehaviorProfile profile_from_json(const nlohmann::json &j);
BehaviorProfile load_profile(const std::string &path);
void save_profile(const std::string &path, const BehaviorProfile &p);

/// Largest total-variation distance over the four decision components
/// (alarm including the unanswered share, exit, signage, rescue). The delay
/// model is not compared.
double profile_distance(const BehaviorProfile &a, const BehaviorProfile &b);

struct AgentPlan {
    std::optional<AlarmChoice> alarm_response = AlarmChoice::D;
    bool follows_signage = false;
    ExitLabel target_exit = ExitLabel::A;
    bool rescues = false;
    double pre_evac_delay_s = 0.0;

    bool operator==(const AgentPlan &) const = default;
};

/// Deterministic in `seed`; each field comes from its own derived stream so
/// the fields are sampled independently.
AgentPlan sample_plan(const BehaviorProfile &profile, std::uint64_t seed);

struct BatchOptions {
    /// One world per agent instead of a shared crowd.
    bool isolated = false;
    /// Agents still inside after this many simulated seconds fail egress.
    double time_limit_s = 900.0;
    /// Extra wait before moving for agents answering a) or b).
    double ab_extra_delay_s = 30.0;
    double cell_size = 0.5;
};

struct BatchResult {
    std::vector<AgentPlan> plans;
    std::vector<SessionLog> logs;
    std::vector<DecisionRecord> records;
};

/// Artificial population drill. Agents spawn at E pushing the wheelchair,
/// escort it to F (where the alarm fires), wait out their sampled delay and
/// then evacuate: rescuers first take the wheelchair to the nearest safe zone.
/// Signage followers use the sign chain leading to their sampled exit.
BatchResult run_batch(const FloorPlan &plan, const BehaviorProfile &profile, std::size_t n_agents,
                      std::uint64_t seed, const DynamicsParams &params, const BatchOptions &options = {});

} // namespace eva
