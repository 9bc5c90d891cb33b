#include "onebm/time.hpp"

#include <charconv>
#include <chrono>

namespace onebm {

namespace {

// Parses exactly `width` digits starting at `pos`; advances `pos` on success.
bool parse_digits(std::string_view s, size_t& pos, int width, int& out) {
  if (pos + width > s.size()) return false;
  int value = 0;
  for (int i = 0; i < width; i++) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  pos += width;
  return true;
}

bool consume(std::string_view s, size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    pos++;
    return true;
  }
  return false;
}

}  // namespace

std::optional<int64_t> parse_timestamp(std::string_view s) {
  // Trim surrounding ASCII whitespace; CSV cells may carry stray spaces.
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;

  size_t pos = 0;
  int year, month, day;
  if (!parse_digits(s, pos, 4, year)) return std::nullopt;
  if (!consume(s, pos, '-')) return std::nullopt;
  if (!parse_digits(s, pos, 2, month)) return std::nullopt;
  if (!consume(s, pos, '-')) return std::nullopt;
  if (!parse_digits(s, pos, 2, day)) return std::nullopt;

  int hour = 0, minute = 0, second = 0;
  if (pos < s.size()) {
    if (!consume(s, pos, ' ') && !consume(s, pos, 'T')) return std::nullopt;
    if (!parse_digits(s, pos, 2, hour)) return std::nullopt;
    if (!consume(s, pos, ':')) return std::nullopt;
    if (!parse_digits(s, pos, 2, minute)) return std::nullopt;
    if (pos < s.size() && s[pos] == ':') {
      pos++;
      if (!parse_digits(s, pos, 2, second)) return std::nullopt;
    }
    consume(s, pos, 'Z');
  }
  if (pos != s.size()) return std::nullopt;

  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                     std::chrono::day{unsigned(day)}};
  if (!ymd.ok()) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

  sys_days days{ymd};
  int64_t epoch = duration_cast<seconds>(days.time_since_epoch()).count();
  return epoch + hour * 3600 + minute * 60 + second;
}

std::string format_timestamp(int64_t epoch_seconds) {
  CivilTime c = civil_from_epoch(epoch_seconds);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", c.year, c.month, c.day, c.hour,
                c.minute, c.second);
  return buf;
}

CivilTime civil_from_epoch(int64_t epoch_seconds) {
  using namespace std::chrono;
  // Floor toward negative infinity so pre-1970 instants decompose correctly.
  int64_t day_count = epoch_seconds / 86400;
  int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    day_count--;
  }
  sys_days sd{days{day_count}};
  year_month_day ymd{sd};
  std::chrono::weekday wd{sd};
  sys_days jan1{year_month_day{ymd.year(), January, std::chrono::day{1}}};

  CivilTime out;
  out.year = int(ymd.year());
  out.month = int(unsigned(ymd.month()));
  out.day = int(unsigned(ymd.day()));
  out.hour = int(rem / 3600);
  out.minute = int((rem % 3600) / 60);
  out.second = int(rem % 60);
  // iso_encoding: Monday = 1 .. Sunday = 7.
  out.day_of_week = int(wd.iso_encoding()) - 1;
  out.day_of_year = int((sd - jan1).count()) + 1;
  return out;
}

}  // namespace onebm
