#include "eva/labels.hpp"
#include "eva/locale.hpp"

#include "locale_data.hpp"

#include <nlohmann/json.hpp>

namespace eva {

std::string to_string(ExitLabel l) { return std::string(1, static_cast<char>('A' + index_of(l))); }
std::string to_string(AlarmChoice c) { return std::string(1, static_cast<char>('a' + index_of(c))); }

std::optional<ExitLabel> parse_exit_label(std::string_view s) {
    if (s.size() != 1 || s[0] < 'A' || s[0] > 'D')
        return std::nullopt;
    return static_cast<ExitLabel>(s[0] - 'A');
}

std::optional<AlarmChoice> parse_alarm_choice(std::string_view s) {
    if (s.size() != 1 || s[0] < 'a' || s[0] > 'd')
        return std::nullopt;
    return static_cast<AlarmChoice>(s[0] - 'a');
}

namespace {

LocaleText load_locale() {
    const auto j = nlohmann::json::parse(detail::kLocaleJson);
    LocaleText t;
    t.alarm_prompt = j.at("alarm_prompt").get<std::string>();
    for (AlarmChoice c : kAlarmChoices)
        t.alarm_options[index_of(c)] = j.at("alarm_options").at(to_string(c)).get<std::string>();
    t.instruction = j.at("instruction").get<std::string>();
    t.greeting = j.at("greeting").get<std::string>();
    for (ExitLabel l : kExitLabels)
        t.exit_names[index_of(l)] = j.at("exits").at(to_string(l)).get<std::string>();
    const auto &pq = j.at("post_questions");
    t.post_questions = {pq.at("is_gamer").get<std::string>(), pq.at("fire_training").get<std::string>(),
                        pq.at("drill_experience").get<std::string>(),
                        pq.at("real_fire_experience").get<std::string>(),
                        pq.at("followed_signage").get<std::string>()};
    t.rejected_already_played = j.at("rejected_already_played").get<std::string>();
    t.time_caveat = j.at("time_caveat").get<std::string>();
    return t;
}

} // namespace

const LocaleText &locale() {
    static const LocaleText text = load_locale();
    return text;
}

} // namespace eva
