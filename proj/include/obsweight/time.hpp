#pragma once

// RFC 3339 UTC timestamps at millisecond resolution.

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "obsweight/error.hpp"

namespace obsweight {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Formats as YYYY-MM-DDTHH:MM:SSZ, adding .mmm only when non-zero.
inline std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[40];
  const auto ms = static_cast<int>(hms.subseconds().count());
  int n = std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                        static_cast<int>(hms.minutes().count()),
                        static_cast<int>(hms.seconds().count()));
  if (ms != 0) n += std::snprintf(buf + n, sizeof(buf) - n, ".%03d", ms);
  std::snprintf(buf + n, sizeof(buf) - n, "Z");
  return buf;
}

/// Parses an RFC 3339 timestamp whose offset is Z or +00:00 / -00:00.
/// Fractional seconds beyond milliseconds are rejected.
inline Timestamp parse_rfc3339(std::string_view text) {
  using namespace std::chrono;
  auto fail = [&](const char* why) {
    return Error(ErrorKind::Parse, "bad RFC 3339 UTC timestamp '" + std::string(text) + "': " + why);
  };
  auto digits = [&](std::size_t pos, std::size_t count) {
    if (pos + count > text.size()) throw fail("truncated");
    int v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
      if (text[i] < '0' || text[i] > '9') throw fail("expected digit");
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  auto expect = [&](std::size_t pos, char a, char b = '\0') {
    if (pos >= text.size() || (text[pos] != a && (b == '\0' || text[pos] != b))) {
      throw fail("unexpected character");
    }
  };
  const int y = digits(0, 4);
  expect(4, '-');
  const int mo = digits(5, 2);
  expect(7, '-');
  const int d = digits(8, 2);
  expect(10, 'T', 't');
  const int h = digits(11, 2);
  expect(13, ':');
  const int mi = digits(14, 2);
  expect(16, ':');
  const int s = digits(17, 2);
  std::size_t pos = 19;
  int ms = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    const std::size_t count = pos - start;
    if (count == 0) throw fail("empty fraction");
    if (count > 3) throw fail("sub-millisecond precision is not supported");
    ms = digits(start, count);
    for (std::size_t i = count; i < 3; ++i) ms *= 10;
  }
  const std::string_view zone = text.substr(pos);
  if (zone != "Z" && zone != "z" && zone != "+00:00" && zone != "-00:00") {
    throw fail("only UTC offsets are accepted");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw fail("field out of range");
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

}  // namespace obsweight
