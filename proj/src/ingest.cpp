#include "surveydx/ingest.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <tuple>
#include <utility>

namespace surveydx::ingest {

namespace {

bool parse_double_strict(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_int_strict(std::string_view s, std::int64_t& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(errc::missing_column, path + ": no column named '" + name + "'");
}

[[noreturn]] void row_error(const std::string& path, int row, const std::string& what) {
  throw Error(errc::parse_error, path + " row " + std::to_string(row) + ": " + what);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw Error(errc::parse_error, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(std::string_view field, char delimiter) {
  const bool needs_quotes = field.find_first_of("\"\r\n") != std::string_view::npos ||
                            field.find(delimiter) != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

ParsedPanel parse_panel(const PanelFileSpec& spec) {
  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + spec.path);

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(errc::parse_error, spec.path + ": empty file, header row required");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line, spec.delimiter);

  const std::size_t gi = column_index(header, spec.geo_column, spec.path);
  const std::size_t di = column_index(header, spec.date_column, spec.path);
  const std::size_t vi = column_index(header, spec.value_column, spec.path);
  const bool want_size = !spec.sample_size_column.empty();
  const std::size_t si = want_size ? column_index(header, spec.sample_size_column, spec.path) : 0;

  std::vector<core::PanelEntry> entries;
  ParsedPanel out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line, spec.delimiter);
    } catch (const Error& e) {
      row_error(spec.path, row, e.what());
    }
    if (fields.size() != header.size()) {
      row_error(spec.path, row,
                "expected " + std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    }
    if (fields[gi].empty()) row_error(spec.path, row, "empty geo");
    if (fields[vi].empty()) {
      ++out.skipped_rows;
      continue;
    }
    core::PanelEntry e;
    e.geo = std::move(fields[gi]);
    try {
      e.date = core::Date::parse(fields[di]);
    } catch (const Error& err) {
      row_error(spec.path, row, err.what());
    }
    if (!parse_double_strict(fields[vi], e.value)) {
      row_error(spec.path, row, "bad value '" + fields[vi] + "'");
    }
    if (want_size && !fields[si].empty()) {
      std::int64_t size = 0;
      if (!parse_int_strict(fields[si], size)) {
        row_error(spec.path, row, "bad sample_size '" + fields[si] + "'");
      }
      e.sample_size = size;
    }
    entries.push_back(std::move(e));
  }
  const std::string name =
      spec.name.empty() ? std::filesystem::path(spec.path).filename().string() : spec.name;
  out.panel = core::validate_panel(std::move(entries), name);
  return out;
}

SmoothedPanel trailing_average(const core::PanelSeries& p, int window_days) {
  if (window_days < 1) throw Error(errc::domain_error, "window_days must be >= 1");
  SmoothedPanel out;
  out.panel.name = p.name;
  out.panel.entries.reserve(p.entries.size());
  out.days_present.reserve(p.entries.size());
  const auto& es = p.entries;
  for (std::size_t j = 0; j < es.size(); ++j) {
    // Window [date - window + 1, date] within this geo's run; entries are
    // sorted by (geo, date), so walk back while the day gap stays inside.
    std::size_t i = j;
    while (i > 0 && es[i - 1].geo == es[j].geo && es[j].date - es[i - 1].date < window_days) {
      --i;
    }
    double sum = 0.0;
    for (std::size_t k = i; k <= j; ++k) sum += es[k].value;
    const int present = static_cast<int>(j - i + 1);
    core::PanelEntry e;
    e.geo = es[j].geo;
    e.date = es[j].date;
    e.value = sum / present;
    out.panel.entries.push_back(std::move(e));
    out.days_present.push_back(present);
  }
  return out;
}

std::vector<AlignedRow> align(const core::PanelSeries& a, const core::PanelSeries& b) {
  std::vector<AlignedRow> rows;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    const auto& ea = a.entries[i];
    const auto& eb = b.entries[j];
    const auto ka = std::tie(ea.geo, ea.date);
    const auto kb = std::tie(eb.geo, eb.date);
    if (ka < kb) {
      ++i;
    } else if (kb < ka) {
      ++j;
    } else {
      rows.push_back(AlignedRow{ea.geo, ea.date, ea.value, eb.value});
      ++i;
      ++j;
    }
  }
  return rows;
}

}  // namespace surveydx::ingest
