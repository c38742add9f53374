#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "wvstack/core/error.hpp"

namespace wvstack {

/// UTC instant with microsecond resolution (leap seconds ignored).
using UtcTime = std::chrono::sys_time<std::chrono::microseconds>;

/// Parses "YYYY-MM-DDTHH:MM:SS[.ffffff]Z". Up to six fractional digits.
inline UtcTime parse_utc(std::string_view text) {
  using namespace std::chrono;
  auto fail = [&] { return Error(Errc::MalformedManifest, "bad UTC timestamp '" + std::string(text) + "'"); };
  if (text.size() < 20 || text.back() != 'Z') throw fail();
  auto digits = [&](std::size_t pos, std::size_t n) {
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (i >= text.size() || text[i] < '0' || text[i] > '9') throw fail();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' || text[16] != ':') throw fail();
  const int y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2);
  const int h = digits(11, 2), mi = digits(14, 2), s = digits(17, 2);
  long long micro = 0;
  std::size_t pos = 19;
  if (text[pos] == '.') {
    std::size_t n = text.size() - 1 - (pos + 1);
    if (n == 0 || n > 6) throw fail();
    micro = digits(pos + 1, n);
    for (std::size_t i = n; i < 6; ++i) micro *= 10;
    pos += 1 + n;
  }
  if (pos != text.size() - 1) throw fail();
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw fail();
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + microseconds{micro};
}

/// Formats as "YYYY-MM-DDTHH:MM:SS.ffffffZ".
inline std::string format_utc(UtcTime t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  auto rest = t - day_point;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto m = duration_cast<minutes>(rest);
  rest -= m;
  const auto s = duration_cast<seconds>(rest);
  rest -= s;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(s.count()), static_cast<long long>(rest.count()));
  return buf;
}

/// b - a in seconds.
inline double seconds_between(UtcTime a, UtcTime b) {
  return std::chrono::duration<double>(b - a).count();
}

inline double days_between(UtcTime a, UtcTime b) { return seconds_between(a, b) / 86400.0; }

inline UtcTime add_seconds(UtcTime t, double s) {
  return t + std::chrono::microseconds(static_cast<long long>(std::llround(s * 1e6)));
}

}  // namespace wvstack
