#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace stockcnn {

using Date = std::chrono::year_month_day;

// Strict YYYY-MM-DD; nullopt on anything else, including impossible dates.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(const Date& date);

inline Date make_date(int y, unsigned m, unsigned d)
{
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline Date add_days(const Date& date, int days)
{
    return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

} // namespace stockcnn
