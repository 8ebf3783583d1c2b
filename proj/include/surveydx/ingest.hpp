#ifndef SURVEYDX_INGEST_HPP
#define SURVEYDX_INGEST_HPP

#include <string>
#include <string_view>
#include <vector>

#include "surveydx/core.hpp"

namespace surveydx::ingest {

// Column mapping for a CSV panel file. The file must be UTF-8 with a header
// row; default schema is geo,date,value[,sample_size] with ISO dates.
struct PanelFileSpec {
  std::string path;
  std::string geo_column = "geo";
  std::string date_column = "date";
  std::string value_column = "value";
  std::string sample_size_column;  // empty: no sample sizes
  char delimiter = ',';
  std::string name;  // panel label; defaults to the file's basename
};

struct ParsedPanel {
  core::PanelSeries panel;
  int skipped_rows = 0;  // rows whose value cell was blank
};

// Reads and validates a panel. Errors: io_error on unreadable files,
// missing_column, parse_error (with the 1-based file row number), plus the
// core validation errors.
ParsedPanel parse_panel(const PanelFileSpec& spec);

// Minimal CSV line handling (RFC-style double-quote escaping).
std::vector<std::string> split_csv_line(const std::string& line, char delimiter);
std::string csv_escape(std::string_view field, char delimiter);

struct SmoothedPanel {
  core::PanelSeries panel;
  std::vector<int> days_present;  // aligned with panel.entries
};

// Trailing mean: per geo, the value at date d becomes the mean over the dates
// in [d - window + 1, d] that are present. Partial windows average over the
// available days; days_present records how many contributed. Dates absent
// from the input produce no output row (missingness is surfaced, not filled).
SmoothedPanel trailing_average(const core::PanelSeries& p, int window_days);

struct AlignedRow {
  std::string geo;
  core::Date date;
  double value_a = 0.0;
  double value_b = 0.0;
};

// Inner join on (geo, date), sorted by (geo, date). Empty result permitted.
std::vector<AlignedRow> align(const core::PanelSeries& a, const core::PanelSeries& b);

}  // namespace surveydx::ingest

#endif  // SURVEYDX_INGEST_HPP
