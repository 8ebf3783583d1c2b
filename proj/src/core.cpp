#include "surveydx/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

namespace surveydx::core {

namespace {

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return !s.empty();
}

}  // namespace

Date Date::parse(std::string_view s) {
  // Strict YYYY-MM-DD, zero padded.
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !all_digits(s.substr(0, 4)) ||
      !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2))) {
    throw Error(errc::parse_error, "bad date '" + std::string(s) + "', expected YYYY-MM-DD");
  }
  int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  unsigned m = static_cast<unsigned>((s[5] - '0') * 10 + (s[6] - '0'));
  unsigned d = static_cast<unsigned>((s[8] - '0') * 10 + (s[9] - '0'));
  return from_ymd(y, m, d);
}

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
    throw Error(errc::parse_error, std::string("nonexistent date ") + buf);
  }
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::to_string() const {
  std::chrono::year_month_day ymd{days};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

PanelSeries validate_panel(std::vector<PanelEntry> entries, std::string name) {
  std::sort(entries.begin(), entries.end(), [](const PanelEntry& a, const PanelEntry& b) {
    return std::tie(a.geo, a.date) < std::tie(b.geo, b.date);
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const PanelEntry& e = entries[i];
    if (!std::isfinite(e.value)) {
      throw Error(errc::non_finite,
                  "non-finite value at (" + e.geo + ", " + e.date.to_string() + ")");
    }
    if (e.sample_size && *e.sample_size < 1) {
      throw Error(errc::bad_sample_size,
                  "sample_size < 1 at (" + e.geo + ", " + e.date.to_string() + ")");
    }
    if (i > 0 && entries[i - 1].geo == e.geo && entries[i - 1].date == e.date) {
      throw Error(errc::duplicate_cell,
                  "duplicate cell (" + e.geo + ", " + e.date.to_string() + ")");
    }
  }
  return PanelSeries{std::move(entries), std::move(name)};
}

void validate_truth(std::span<const GeoTruth> truth) {
  std::set<std::string> seen;
  for (const GeoTruth& g : truth) {
    if (g.population < 1) {
      throw Error(errc::domain_error, "population < 1 for geo " + g.geo);
    }
    if (!std::isfinite(g.true_rate) || g.true_rate < 0.0 || g.true_rate > 1.0) {
      throw Error(errc::domain_error, "true_rate outside [0, 1] for geo " + g.geo);
    }
    if (!seen.insert(g.geo).second) {
      throw Error(errc::domain_error, "duplicate geo " + g.geo);
    }
  }
}

}  // namespace surveydx::core
