#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace eva {

/// The four building exits.
enum class ExitLabel : std::uint8_t { A, B, C, D };

/// Answers to the alarm question, options a) to d).
enum class AlarmChoice : std::uint8_t { A, B, C, D };

inline constexpr std::array kExitLabels{ExitLabel::A, ExitLabel::B, ExitLabel::C, ExitLabel::D};
inline constexpr std::array kAlarmChoices{AlarmChoice::A, AlarmChoice::B, AlarmChoice::C, AlarmChoice::D};

constexpr std::size_t index_of(ExitLabel l) { return static_cast<std::size_t>(l); }
constexpr std::size_t index_of(AlarmChoice c) { return static_cast<std::size_t>(c); }

std::string to_string(ExitLabel l);
std::string to_string(AlarmChoice c);

std::optional<ExitLabel> parse_exit_label(std::string_view s);
std::optional<AlarmChoice> parse_alarm_choice(std::string_view s);

} // namespace eva
