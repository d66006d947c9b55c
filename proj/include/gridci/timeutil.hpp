#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace gridci {

using Timestamp = std::chrono::sys_seconds;

inline constexpr std::chrono::seconds kHour{3600};

// Parses "YYYY-MM-DDTHH:MMZ" or "YYYY-MM-DDTHH:MM:SSZ" (UTC only).
inline std::optional<Timestamp> parse_utc_timestamp(std::string_view text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail[4] = {0, 0, 0, 0};
    std::string buf(text);
    int n = std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%3s", &y, &mo, &d, &h, &mi, &s, tail);
    if (n == 7) {
        if (std::string_view(tail) != "Z") return std::nullopt;
    } else {
        s = 0;
        tail[0] = 0;
        n = std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d%3s", &y, &mo, &d, &h, &mi, tail);
        if (n != 6 || std::string_view(tail) != "Z") return std::nullopt;
    }
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Timestamp{std::chrono::sys_days{ymd}.time_since_epoch()} + std::chrono::hours{h} +
           std::chrono::minutes{mi} + std::chrono::seconds{s};
}

inline std::string format_utc_hour(Timestamp ts) {
    auto day = std::chrono::floor<std::chrono::days>(ts);
    std::chrono::year_month_day ymd{day};
    std::chrono::hh_mm_ss hms{ts - day};
    char out[64];
    std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()));
    return out;
}

inline bool is_on_the_hour(Timestamp ts) {
    return ts.time_since_epoch().count() % kHour.count() == 0;
}

inline int utc_hour_of_day(Timestamp ts) {
    auto day = std::chrono::floor<std::chrono::days>(ts);
    return static_cast<int>(std::chrono::floor<std::chrono::hours>(ts - day).count());
}

inline unsigned utc_month(Timestamp ts) {
    std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(ts)};
    return static_cast<unsigned>(ymd.month());
}

}  // namespace gridci
