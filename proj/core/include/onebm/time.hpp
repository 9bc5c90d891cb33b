#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace onebm {

// Calendar decomposition of a UTC timestamp.
struct CivilTime {
  int year;
  int month;        // 1-12
  int day;          // 1-31
  int hour;         // 0-23
  int minute;       // 0-59
  int second;       // 0-59
  int day_of_week;  // 0 = Monday .. 6 = Sunday
  int day_of_year;  // 1-366
};

// Parses an ISO-8601 date or date-time ("YYYY-MM-DD", optionally followed by
// " HH:MM[:SS]" or "THH:MM[:SS]", optional trailing "Z"). UTC is assumed.
// Returns epoch seconds, or nullopt when the string is not a timestamp.
std::optional<int64_t> parse_timestamp(std::string_view s);

// Renders epoch seconds as "YYYY-MM-DD HH:MM:SS".
std::string format_timestamp(int64_t epoch_seconds);

CivilTime civil_from_epoch(int64_t epoch_seconds);

}  // namespace onebm
