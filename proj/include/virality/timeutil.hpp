#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace virality {

// Civil <-> epoch conversions (proleptic Gregorian), Howard Hinnant's
// days_from_civil construction. All timestamps in this project are UTC
// epoch seconds.

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilTime {
  int year = 1970;
  unsigned month = 1;  // 1-12
  unsigned day = 1;    // 1-31
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned second = 0;
};

inline CivilTime civil_from_epoch(std::int64_t secs) {
  std::int64_t days = secs / 86400;
  std::int64_t rem = secs % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  CivilTime c;
  c.year = static_cast<int>(y + (m <= 2));
  c.month = m;
  c.day = d;
  c.hour = static_cast<unsigned>(rem / 3600);
  c.minute = static_cast<unsigned>((rem % 3600) / 60);
  c.second = static_cast<unsigned>(rem % 60);
  return c;
}

// Weekday with Monday = 0 ... Sunday = 6.
inline int weekday_from_epoch(std::int64_t secs) {
  std::int64_t days = secs / 86400;
  if (secs % 86400 < 0) --days;
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

// RFC 3339 timestamp ("2017-03-05T14:21:09Z", optional fractional seconds,
// 'Z' or +hh:mm / -hh:mm offset). Returns UTC epoch seconds, fraction
// truncated. nullopt on malformed input.
inline std::optional<std::int64_t> parse_rfc3339(std::string_view s) {
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (i >= s.size() || !digit(s[i])) return -1;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 20) return std::nullopt;
  const int year = num(0, 4), mon = num(5, 2), day = num(8, 2);
  const int hh = num(11, 2), mi = num(14, 2), ss = num(17, 2);
  if (year < 0 || mon < 1 || mon > 12 || day < 1 || day > 31) return std::nullopt;
  if (hh < 0 || hh > 23 || mi < 0 || mi > 59 || ss < 0 || ss > 60) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    if (pos >= s.size() || !digit(s[pos])) return std::nullopt;
    while (pos < s.size() && digit(s[pos])) ++pos;
  }
  if (pos >= s.size()) return std::nullopt;
  std::int64_t offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    const int oh = num(pos + 1, 2);
    if (pos + 3 >= s.size() || s[pos + 3] != ':') return std::nullopt;
    const int om = num(pos + 4, 2);
    if (oh < 0 || oh > 23 || om < 0 || om > 59) return std::nullopt;
    offset = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  const std::int64_t days =
      days_from_civil(year, static_cast<unsigned>(mon), static_cast<unsigned>(day));
  return days * 86400 + hh * 3600 + mi * 60 + (ss == 60 ? 59 : ss) - offset;
}

inline std::string format_rfc3339(std::int64_t secs) {
  const CivilTime c = civil_from_epoch(secs);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02uZ", c.year,
                c.month, c.day, c.hour, c.minute, c.second);
  return buf;
}

}  // namespace virality
