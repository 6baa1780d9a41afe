#pragma once

#include "eva/labels.hpp"

#include <array>
#include <string>

namespace eva {

/// User-facing wording, loaded from the bundled localization file.
struct LocaleText {
    std::string alarm_prompt;
    std::array<std::string, 4> alarm_options;
    std::string instruction;
    std::string greeting;
    std::array<std::string, 4> exit_names;
    /// Post-game question texts, in the order is_gamer, fire_training,
    /// drill_experience, real_fire_experience, followed_signage.
    std::array<std::string, 5> post_questions;
    std::string rejected_already_played;
    std::string time_caveat;
};

const LocaleText &locale();

} // namespace eva
