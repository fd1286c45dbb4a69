#include "aircal/timeutil.hpp"

#include "aircal/errors.hpp"

#include <chrono>
#include <cstdio>

namespace aircal {

namespace {

DayStamp civil_to_days(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) {
        throw DataError("invalid calendar date: " + std::to_string(y) + "-" +
                        std::to_string(m) + "-" + std::to_string(d));
    }
    return sys_days{ymd}.time_since_epoch().count();
}

void days_to_civil(DayStamp days, int& y, unsigned& m, unsigned& d) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    y = static_cast<int>(ymd.year());
    m = static_cast<unsigned>(ymd.month());
    d = static_cast<unsigned>(ymd.day());
}

} // namespace

MinuteStamp parse_minute(std::string_view text) {
    int y = 0, mon = 0, day = 0, hh = 0, mm = 0, ss = 0;
    char sep = 0;
    int n = std::sscanf(std::string(text).c_str(), "%d-%d-%d%c%d:%d:%d",
                        &y, &mon, &day, &sep, &hh, &mm, &ss);
    if (n < 6 || (sep != ' ' && sep != 'T')) {
        throw DataError("unparseable timestamp: '" + std::string(text) + "'");
    }
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60) {
        throw DataError("timestamp out of range: '" + std::string(text) + "'");
    }
    DayStamp days = civil_to_days(y, static_cast<unsigned>(mon), static_cast<unsigned>(day));
    return days * 1440 + hh * 60 + mm;
}

DayStamp parse_day(std::string_view text) {
    int y = 0, mon = 0, day = 0;
    if (std::sscanf(std::string(text).c_str(), "%d-%d-%d", &y, &mon, &day) != 3) {
        throw DataError("unparseable date: '" + std::string(text) + "'");
    }
    return civil_to_days(y, static_cast<unsigned>(mon), static_cast<unsigned>(day));
}

HourStamp parse_hour(std::string_view text) {
    MinuteStamp m = parse_minute(text);
    if (m % 60 != 0) {
        throw DataError("hour stamp has nonzero minutes: '" + std::string(text) + "'");
    }
    return minute_to_hour(m);
}

std::string format_minute(MinuteStamp m) {
    DayStamp days = (m >= 0) ? m / 1440 : -((-m + 1439) / 1440);
    int rem = static_cast<int>(m - days * 1440);
    int y;
    unsigned mon, d;
    days_to_civil(days, y, mon, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", y, mon, d, rem / 60, rem % 60);
    return buf;
}

std::string format_hour(HourStamp h) { return format_minute(h * 60); }

std::string format_day(DayStamp d) {
    int y;
    unsigned mon, dd;
    days_to_civil(d, y, mon, dd);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, mon, dd);
    return buf;
}

} // namespace aircal
