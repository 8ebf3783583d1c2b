#ifndef SURVEYDX_CORE_HPP
#define SURVEYDX_CORE_HPP

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surveydx/error.hpp"

namespace surveydx::core {

// Calendar date (no time zone). Stored as days since the civil epoch so that
// ordering and day arithmetic are exact.
struct Date {
  std::chrono::sys_days days{};

  // Strict ISO-8601 "YYYY-MM-DD"; throws parse_error on malformed or
  // non-existent dates.
  static Date parse(std::string_view s);
  static Date from_ymd(int year, unsigned month, unsigned day);

  std::string to_string() const;
  Date plus_days(std::int64_t n) const { return Date{days + std::chrono::days{n}}; }

  friend auto operator<=>(const Date&, const Date&) = default;
  friend std::int64_t operator-(const Date& a, const Date& b) {
    return (a.days - b.days).count();
  }
};

// One cell of a geo x date panel.
struct PanelEntry {
  std::string geo;
  Date date;
  double value = 0.0;
  std::optional<std::int64_t> sample_size;

  friend bool operator==(const PanelEntry&, const PanelEntry&) = default;
};

// Geo x date grid of values, the universal input shape. Immutable after
// construction through validate_panel; safe to share across workers.
struct PanelSeries {
  std::vector<PanelEntry> entries;  // sorted by (geo, date); (geo, date) unique
  std::string name;
};

// Sorts entries by (geo, date) and enforces the panel invariants:
// duplicate_cell on a repeated (geo, date), non_finite on NaN/inf values,
// bad_sample_size on sample_size < 1. Idempotent, and the output order does
// not depend on the input order.
PanelSeries validate_panel(std::vector<PanelEntry> entries, std::string name);

// Per-geo ground truth for the ranking simulations.
struct GeoTruth {
  std::string geo;
  std::int64_t population = 0;  // persons
  double true_rate = 0.0;       // proportion in [0, 1]
};

// Enforces distinct geos, positive populations, rates in [0, 1].
void validate_truth(std::span<const GeoTruth> truth);

}  // namespace surveydx::core

#endif  // SURVEYDX_CORE_HPP
