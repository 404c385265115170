#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tracekit {

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
};

// Proleptic Gregorian calendar <-> days since 1970-01-01, all UTC.
std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

inline std::int64_t epoch_day(std::int64_t epoch_seconds) {
    return floor_div(epoch_seconds, 86400);
}

inline CivilDate civil_from_epoch(std::int64_t epoch_seconds) {
    return civil_from_days(epoch_day(epoch_seconds));
}

// Accepts integer epoch seconds, "YYYY-MM-DD" or "YYYY-MM-DD[ T]HH:MM:SS[Z]".
// Returns nullopt when the text is neither.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

// "YYYY-MM-DD" for a day index (days since epoch).
std::string format_day(std::int64_t day);

}  // namespace tracekit
