#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace aircal {

// All timestamps are UTC. Minutes and hours count from the Unix epoch,
// days are civil days (hours / 24). Keeping integral stamps makes panel
// alignment and day splitting exact.
using MinuteStamp = std::int64_t; // minutes since 1970-01-01T00:00Z
using HourStamp = std::int64_t;   // hours since 1970-01-01T00:00Z
using DayStamp = std::int64_t;    // days since 1970-01-01

/// Parse "YYYY-MM-DD[ T]hh:mm[:ss][Z]"; seconds are truncated to the minute.
MinuteStamp parse_minute(std::string_view text);

/// Parse "YYYY-MM-DD".
DayStamp parse_day(std::string_view text);

std::string format_minute(MinuteStamp m);
std::string format_hour(HourStamp h);   // "YYYY-MM-DDThh:00"
std::string format_day(DayStamp d);     // "YYYY-MM-DD"

/// Parse the panel hour format written by format_hour (minutes must be 00).
HourStamp parse_hour(std::string_view text);

inline HourStamp minute_to_hour(MinuteStamp m) {
    return (m >= 0) ? m / 60 : -((-m + 59) / 60);
}
inline DayStamp hour_to_day(HourStamp h) {
    return (h >= 0) ? h / 24 : -((-h + 23) / 24);
}
inline HourStamp day_to_hour(DayStamp d) { return d * 24; }

/// Hour of day in [0, 24).
inline int hour_of_day(HourStamp h) {
    int r = static_cast<int>(h % 24);
    return r < 0 ? r + 24 : r;
}

/// Quarter-hour index within the hour, in [0, 4).
inline int quarter_of_hour(MinuteStamp m) {
    int r = static_cast<int>(m % 60);
    if (r < 0) r += 60;
    return r / 15;
}

} // namespace aircal
