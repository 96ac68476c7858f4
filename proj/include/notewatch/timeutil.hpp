#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace notewatch {

// All timestamps are UTC, stored as seconds since the Unix epoch.
// Window arithmetic throughout the project is 24-hour based (a "day" is
// exactly 86400 seconds), never calendar based.
inline constexpr std::int64_t kSecondsPerDay = 86400;

// Parses "YYYY-MM-DDTHH:MM[:SS][Z]" (also accepts a space separator).
// Returns nullopt on malformed input.
std::optional<std::int64_t> parse_iso8601(const std::string& s);

// Formats as "YYYY-MM-DDTHH:MMZ" (minute precision, the note schema) or
// with seconds when `with_seconds` is set.
std::string format_iso8601(std::int64_t epoch_seconds, bool with_seconds = false);

// Civil-date helpers (proleptic Gregorian).
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

}  // namespace notewatch
