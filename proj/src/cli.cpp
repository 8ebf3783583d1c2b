#include "surveydx/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string_view>
#include <utility>

#include "CLI11.hpp"
#include "surveydx/core.hpp"
#include "surveydx/decomposition.hpp"
#include "surveydx/error.hpp"
#include "surveydx/ingest.hpp"
#include "surveydx/ranking.hpp"
#include "surveydx/rng.hpp"
#include "surveydx/scenario.hpp"
#include "surveydx/twogroup.hpp"

namespace surveydx::cli {

namespace {

// Flag-shape problems the parser cannot see (bad --seed text, missing response
// rule, ...). Mapped to exit code 2 like CLI11 parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// output tables

struct Cell {
  enum class Kind { text, real, integer, boolean } kind = Kind::text;
  std::string text;
  double real = 0.0;
  std::int64_t integer = 0;
  bool boolean = false;

  static Cell str(std::string v) {
    Cell c;
    c.kind = Kind::text;
    c.text = std::move(v);
    return c;
  }
  static Cell num(double v) {
    Cell c;
    c.kind = Kind::real;
    c.real = v;
    return c;
  }
  static Cell count(std::int64_t v) {
    Cell c;
    c.kind = Kind::integer;
    c.integer = v;
    return c;
  }
  static Cell flag(bool v) {
    Cell c;
    c.kind = Kind::boolean;
    c.boolean = v;
    return c;
  }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::string cell_csv(const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::text: return ingest::csv_escape(c.text, ',');
    case Cell::Kind::real: return format_double(c.real);
    case Cell::Kind::integer: return std::to_string(c.integer);
    case Cell::Kind::boolean: return c.boolean ? "true" : "false";
  }
  return {};
}

std::string cell_json(const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::text: return '"' + json_escape(c.text) + '"';
    case Cell::Kind::real:
      return std::isfinite(c.real) ? format_double(c.real) : std::string("null");
    case Cell::Kind::integer: return std::to_string(c.integer);
    case Cell::Kind::boolean: return c.boolean ? "true" : "false";
  }
  return {};
}

void emit_csv(const Table& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out << ',';
    out << ingest::csv_escape(t.columns[i], ',');
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << cell_csv(row[i]);
    }
    out << '\n';
  }
}

void emit_json(const Table& t, std::ostream& out) {
  out << "[\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out << "  {";
    for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
      if (i) out << ", ";
      out << '"' << json_escape(t.columns[i]) << "\": " << cell_json(t.rows[r][i]);
    }
    out << (r + 1 < t.rows.size() ? "},\n" : "}\n");
  }
  out << "]\n";
}

// ---------------------------------------------------------------------------
// shared flags

struct Shared {
  std::string format = "csv";
  std::string out_path;
  std::string units = "proportion";
  std::string seed_text;
  int threads = 0;  // 0: unset, fall back to SURVEYDX_THREADS, then 1
};

void write_table(const Table& t, const Shared& sh, std::ostream& out) {
  std::ostringstream buf;
  if (sh.format == "json") {
    emit_json(t, buf);
  } else {
    emit_csv(t, buf);
  }
  if (sh.out_path.empty()) {
    out << buf.str();
    return;
  }
  std::ofstream f(sh.out_path, std::ios::binary);
  if (!f) throw Error(errc::io_error, "cannot open " + sh.out_path + " for writing");
  f << buf.str();
  f.flush();
  if (!f) throw Error(errc::io_error, "failed writing " + sh.out_path);
}

bool percent_units(const Shared& sh) { return sh.units == "percent"; }

// Converts a value-dimensioned flag to a proportion (percent inputs only;
// model parameters and probabilities are never converted).
double to_proportion(const Shared& sh, double v) {
  return percent_units(sh) ? v / 100.0 : v;
}

void scale_panel(core::PanelSeries& p, const Shared& sh) {
  if (!percent_units(sh)) return;
  for (auto& e : p.entries) e.value /= 100.0;
}

RngSeed need_seed(const Shared& sh, std::ostream& err) {
  if (sh.seed_text.empty()) {
    throw UsageError("--seed is required for stochastic commands (use --seed auto to draw one)");
  }
  if (sh.seed_text == "auto") {
    std::random_device rd;
    const std::uint64_t v =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    err << "seed: " << v << "\n";
    return RngSeed{v};
  }
  std::uint64_t v = 0;
  const char* first = sh.seed_text.data();
  const char* last = first + sh.seed_text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw UsageError("--seed must be a base-10 unsigned 64-bit integer or 'auto'");
  }
  return RngSeed{v};
}

int resolve_threads(const Shared& sh) {
  if (sh.threads != 0) {
    if (sh.threads < 1) throw UsageError("--threads must be >= 1");
    return sh.threads;
  }
  if (const char* env = std::getenv("SURVEYDX_THREADS")) {
    int v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1) {
      throw UsageError("SURVEYDX_THREADS must be an integer >= 1");
    }
    return v;
  }
  return 1;
}

char resolve_delimiter(const std::string& d) {
  if (d.size() != 1) throw UsageError("--delimiter must be a single character");
  return d[0];
}

// ---------------------------------------------------------------------------
// input file helpers

struct FileFlags {
  std::string geo_column = "geo";
  std::string date_column = "date";
  std::string value_column = "value";
  std::string sample_size_column;
  std::string delimiter = ",";
};

void add_file_flags(CLI::App* cmd, FileFlags& ff) {
  cmd->add_option("--geo-column", ff.geo_column, "geo column name")->capture_default_str();
  cmd->add_option("--date-column", ff.date_column, "date column name")->capture_default_str();
  cmd->add_option("--value-column", ff.value_column, "value column name")->capture_default_str();
  cmd->add_option("--sample-size-column", ff.sample_size_column,
                  "optional sample size column name");
  cmd->add_option("--delimiter", ff.delimiter, "field delimiter")->capture_default_str();
}

core::PanelSeries load_panel(const std::string& path, const FileFlags& ff, const Shared& sh,
                             const std::string& label, std::ostream& err) {
  ingest::PanelFileSpec spec;
  spec.path = path;
  spec.geo_column = ff.geo_column;
  spec.date_column = ff.date_column;
  spec.value_column = ff.value_column;
  spec.sample_size_column = ff.sample_size_column;
  spec.delimiter = resolve_delimiter(ff.delimiter);
  spec.name = label;
  ingest::ParsedPanel parsed = ingest::parse_panel(spec);
  if (parsed.skipped_rows > 0) {
    err << label << ": skipped " << parsed.skipped_rows << " blank-value rows\n";
  }
  scale_panel(parsed.panel, sh);
  return std::move(parsed.panel);
}

// Truth CSV: columns geo,population,true_rate (fixed names). true_rate is
// value data, so --units percent divides it by 100.
std::vector<core::GeoTruth> load_truth(const std::string& path, const std::string& delim_flag,
                                       const Shared& sh) {
  const char delim = resolve_delimiter(delim_flag);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(errc::parse_error, path + ": empty file, header row required");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = ingest::split_csv_line(line, delim);
  auto col = [&](const char* name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(errc::missing_column, path + ": no column named '" + std::string(name) + "'");
  };
  const std::size_t gi = col("geo");
  const std::size_t pi = col("population");
  const std::size_t ri = col("true_rate");

  std::vector<core::GeoTruth> truth;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = ingest::split_csv_line(line, delim);
    if (fields.size() != header.size()) {
      throw Error(errc::parse_error, path + " row " + std::to_string(row) + ": field count");
    }
    core::GeoTruth g;
    g.geo = fields[gi];
    {
      const auto& cell = fields[pi];
      const auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), g.population);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw Error(errc::parse_error,
                    path + " row " + std::to_string(row) + ": bad population '" + cell + "'");
      }
    }
    {
      const auto& cell = fields[ri];
      const auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), g.true_rate);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw Error(errc::parse_error,
                    path + " row " + std::to_string(row) + ": bad true_rate '" + cell + "'");
      }
    }
    g.true_rate = to_proportion(sh, g.true_rate);
    truth.push_back(std::move(g));
  }
  core::validate_truth(truth);
  return truth;
}

// Deterministic stand-in for US state truth: 51 geos, populations log-spaced
// over the state range, rates evenly spaced on [0.20, 0.40].
std::vector<core::GeoTruth> synthetic_truth() {
  std::vector<core::GeoTruth> truth;
  truth.reserve(51);
  for (int i = 0; i < 51; ++i) {
    core::GeoTruth g;
    char name[8];
    std::snprintf(name, sizeof name, "G%02d", i + 1);
    g.geo = name;
    g.population = std::llround(580000.0 * std::pow(39500000.0 / 580000.0, i / 50.0));
    g.true_rate = 0.20 + 0.20 * i / 50.0;
    truth.push_back(std::move(g));
  }
  return truth;
}

// ---------------------------------------------------------------------------
// result table builders

Table scenario_table(const std::string& label, const scenario::ScenarioResult& r) {
  Table t;
  t.columns = {"scenario",      "ddc_hat",           "true_corr",
               "design_effect", "mean_estimate",     "mean_respondents",
               "replications_used", "closed_form"};
  t.rows.push_back({Cell::str(label), Cell::num(r.ddc_hat), Cell::num(r.true_corr),
                    Cell::num(r.design_effect), Cell::num(r.mean_estimate),
                    Cell::num(r.mean_respondents), Cell::count(r.replications_used),
                    Cell::flag(r.closed_form)});
  return t;
}

Table curve_table(const std::vector<twogroup::CurvePoint>& pts) {
  Table t;
  t.columns = {"rho", "true_rate", "respondent_rate", "bias", "ddc"};
  for (const auto& p : pts) {
    t.rows.push_back({Cell::num(p.rho), Cell::num(p.true_rate), Cell::num(p.respondent_rate),
                      Cell::num(p.bias), Cell::num(p.ddc)});
  }
  return t;
}

std::vector<double> rho_grid(double rho_max, int steps) {
  if (!std::isfinite(rho_max) || rho_max <= 0.0 || rho_max > 1.0) {
    throw Error(errc::domain_error, "--rho-max must lie in (0, 1]");
  }
  if (steps < 1) throw Error(errc::domain_error, "--steps must be >= 1");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) grid.push_back(rho_max * i / steps);
  return grid;
}

// ---------------------------------------------------------------------------
// option bundles reused by twogroup curve / repro fig-ddc-curve

struct TwoGroupFlags {
  double eta = 0.5;
  double b = 2.0;
  double gamma = 4.0;
  double base_response = 0.02;
  std::int64_t N = 250'000'000;
  std::int64_t n = 30'000;
};

void add_twogroup_flags(CLI::App* cmd, TwoGroupFlags& tg, bool with_scale) {
  cmd->add_option("--eta", tg.eta, "share of group 1")->capture_default_str();
  cmd->add_option("--b", tg.b, "differential outcome rate (>= 1)")->capture_default_str();
  cmd->add_option("--gamma", tg.gamma, "differential response rate (>= 1)")
      ->capture_default_str();
  cmd->add_option("--base-response", tg.base_response, "group 1 response probability")
      ->capture_default_str();
  if (with_scale) {
    cmd->add_option("--N", tg.N, "population size")->capture_default_str();
    cmd->add_option("--n", tg.n, "nominal sample size for ddc scaling")->capture_default_str();
  }
}

twogroup::TwoGroupParams to_params(const TwoGroupFlags& tg) {
  twogroup::TwoGroupParams p;
  p.eta = tg.eta;
  p.b = tg.b;
  p.gamma = tg.gamma;
  p.base_response = tg.base_response;
  p.N = tg.N;
  p.n = tg.n;
  return p;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Shared sh;

  CLI::App app{"surveydx: diagnostics for biased-survey error analysis"};
  app.require_subcommand(1);
  app.footer(
      "Shared flags accepted by every subcommand:\n"
      "  --format {csv,json}   output format (default csv)\n"
      "  --out PATH            write the table to PATH instead of stdout\n"
      "  --units {proportion,percent}  units of value data (files and the\n"
      "                        decompose/neff/zstat value flags); percent is\n"
      "                        divided by 100 once at the boundary\n"
      "  --seed {N,auto}       RNG seed for stochastic commands ('auto' draws\n"
      "                        one and prints it on stderr)\n"
      "  --threads K           worker threads for replicated simulations\n"
      "                        (default: SURVEYDX_THREADS or 1)");
  app.add_option("--format", sh.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--out", sh.out_path, "output file path (default: stdout)");
  app.add_option("--units", sh.units, "units of value data")
      ->check(CLI::IsMember({"proportion", "percent"}))
      ->capture_default_str();
  app.add_option("--seed", sh.seed_text, "RNG seed (unsigned integer or 'auto')");
  app.add_option("--threads", sh.threads, "worker threads for simulations")
      ->check(CLI::PositiveNumber);

  std::vector<std::pair<CLI::App*, std::function<void()>>> handlers;
  auto on = [&](CLI::App* leaf, std::function<void()> fn) {
    leaf->fallthrough();
    handlers.emplace_back(leaf, std::move(fn));
  };

  // ---- decompose ----
  struct {
    double sample_mean = 0.0, pop_mean = 0.0, sigma = 0.0;
    std::int64_t n = 0, N = 0;
  } dec;
  {
    CLI::App* cmd = app.add_subcommand(
        "decompose", "split a survey error into quality x quantity x difficulty");
    cmd->add_option("--sample-mean", dec.sample_mean, "observed sample mean")->required();
    cmd->add_option("--pop-mean", dec.pop_mean, "known population mean")->required();
    cmd->add_option("--n", dec.n, "respondents")->required();
    cmd->add_option("--N", dec.N, "population size")->required();
    cmd->add_option("--sigma", dec.sigma, "population SD of the outcome")->required();
    on(cmd, [&] {
      decomp::DecompositionInput in;
      in.sample_mean = to_proportion(sh, dec.sample_mean);
      in.pop_mean = to_proportion(sh, dec.pop_mean);
      in.n = dec.n;
      in.N = dec.N;
      in.sigma = to_proportion(sh, dec.sigma);
      const decomp::DecompositionResult r = decomp::decompose_error(in);
      Table t;
      t.columns = {"error", "ddc", "quantity_term", "difficulty_term", "n_eff", "out_of_range"};
      t.rows.push_back({Cell::num(r.error), Cell::num(r.ddc), Cell::num(r.quantity_term),
                        Cell::num(r.difficulty_term), Cell::num(r.n_eff),
                        Cell::flag(r.out_of_range)});
      write_table(t, sh, out);
    });
  }

  // ---- neff ----
  struct {
    double error = 0.0, sample_mean = 0.0, pop_mean = 0.0, sigma = 0.0;
    std::int64_t N = 0;
  } ne;
  {
    CLI::App* cmd = app.add_subcommand(
        "neff", "effective sample size of an estimate with the observed error");
    CLI::Option* oerr = cmd->add_option("--error", ne.error, "observed error of the estimate");
    CLI::Option* osm = cmd->add_option("--sample-mean", ne.sample_mean, "observed sample mean");
    CLI::Option* opm = cmd->add_option("--pop-mean", ne.pop_mean, "known population mean");
    cmd->add_option("--sigma", ne.sigma, "population SD of the outcome")->required();
    cmd->add_option("--N", ne.N, "population size")->required();
    on(cmd, [&, oerr, osm, opm] {
      const bool has_err = oerr->count() > 0;
      const bool has_means = osm->count() > 0 && opm->count() > 0;
      if (has_err == has_means) {
        throw UsageError("pass either --error or both --sample-mean and --pop-mean");
      }
      const double error = has_err
                               ? to_proportion(sh, ne.error)
                               : to_proportion(sh, ne.sample_mean) - to_proportion(sh, ne.pop_mean);
      const double sigma = to_proportion(sh, ne.sigma);
      const double n_eff = decomp::effective_sample_size(error, sigma, ne.N);
      Table t;
      t.columns = {"error", "sigma", "N", "n_eff"};
      t.rows.push_back(
          {Cell::num(error), Cell::num(sigma), Cell::count(ne.N), Cell::num(n_eff)});
      write_table(t, sh, out);
    });
  }

  // ---- zstat ----
  struct {
    double sample_mean = 0.0, pop_mean = 0.0, sigma = 0.0;
    std::int64_t n = 0, N = 0;
  } zs;
  {
    CLI::App* cmd =
        app.add_subcommand("zstat", "Z statistic of an estimate against a known benchmark");
    cmd->add_option("--sample-mean", zs.sample_mean, "observed sample mean")->required();
    cmd->add_option("--pop-mean", zs.pop_mean, "known population mean")->required();
    cmd->add_option("--n", zs.n, "respondents")->required();
    cmd->add_option("--N", zs.N, "population size")->required();
    cmd->add_option("--sigma", zs.sigma, "population SD of the outcome")->required();
    on(cmd, [&] {
      decomp::DecompositionInput in;
      in.sample_mean = to_proportion(sh, zs.sample_mean);
      in.pop_mean = to_proportion(sh, zs.pop_mean);
      in.n = zs.n;
      in.N = zs.N;
      in.sigma = to_proportion(sh, zs.sigma);
      Table t;
      t.columns = {"z", "ddc"};
      t.rows.push_back(
          {Cell::num(decomp::z_statistic(in)), Cell::num(decomp::ddc_estimate(in))});
      write_table(t, sh, out);
    });
  }

  // ---- scenario ----
  struct {
    std::int64_t N = 1'000'000;
    double true_rate = 0.5;
    int reps = 10'000;
    std::int64_t srs_size = 0;
    double misread_prob = 0.5;
    double respond_pos = 0.0, respond_neg = 0.0;
    double report_pos = 1.0, report_neg = 0.0;
  } sc;
  {
    CLI::App* cmd = app.add_subcommand(
        "scenario", "measurement-error scenarios: ddc_hat vs corr(R,Y) vs design effect");
    cmd->require_subcommand(1);
    cmd->fallthrough();

    CLI::App* intim = cmd->add_subcommand(
        "intimidating", "SRS where every respondent reports 1 regardless of truth");
    intim->add_option("--N", sc.N, "population size")->capture_default_str();
    intim->add_option("--sample-size", sc.srs_size, "SRS size")->required();
    intim->add_option("--true-rate", sc.true_rate, "population positive rate (proportion)")
        ->capture_default_str();
    intim->add_option("--reps", sc.reps, "design-effect replications")->capture_default_str();
    on(intim, [&] {
      scenario::ScenarioConfig cfg =
          scenario::intimidating_config(sc.N, sc.srs_size, sc.true_rate);
      cfg.replications = sc.reps;
      write_table(scenario_table("intimidating", scenario::evaluate(cfg, need_seed(sh, err))),
                  sh, out);
    });

    CLI::App* mis = cmd->add_subcommand(
        "misread", "only positives respond; each misreads the question with some probability");
    mis->add_option("--N", sc.N, "population size")->capture_default_str();
    mis->add_option("--misread-prob", sc.misread_prob, "probability a respondent misreads")
        ->capture_default_str();
    mis->add_option("--true-rate", sc.true_rate, "population positive rate (proportion)")
        ->capture_default_str();
    on(mis, [&] {
      const scenario::ScenarioConfig cfg =
          scenario::misread_config(sc.N, sc.misread_prob, sc.true_rate);
      write_table(scenario_table("misread", scenario::evaluate(cfg, RngSeed{0})), sh, out);
    });

    CLI::App* cust = cmd->add_subcommand("custom", "scenario with explicit response/report rules");
    cust->add_option("--N", sc.N, "population size")->capture_default_str();
    cust->add_option("--true-rate", sc.true_rate, "population positive rate (proportion)")
        ->capture_default_str();
    CLI::Option* osrs = cust->add_option("--srs-size", sc.srs_size, "respond via an SRS of this size");
    CLI::Option* orp =
        cust->add_option("--respond-if-positive", sc.respond_pos, "response probability, Y=1");
    CLI::Option* orn =
        cust->add_option("--respond-if-negative", sc.respond_neg, "response probability, Y=0");
    cust->add_option("--report-if-positive", sc.report_pos, "P(report 1 | respond, Y=1)")
        ->capture_default_str();
    cust->add_option("--report-if-negative", sc.report_neg, "P(report 1 | respond, Y=0)")
        ->capture_default_str();
    cust->add_option("--reps", sc.reps, "design-effect replications")->capture_default_str();
    on(cust, [&, osrs, orp, orn] {
      const bool srs = osrs->count() > 0;
      const bool group = orp->count() > 0 || orn->count() > 0;
      if (srs == group || (group && (orp->count() == 0 || orn->count() == 0))) {
        throw UsageError(
            "pass either --srs-size or both --respond-if-positive and --respond-if-negative");
      }
      scenario::ScenarioConfig cfg;
      cfg.population_size = sc.N;
      cfg.true_rate = sc.true_rate;
      cfg.report_one_if_positive = sc.report_pos;
      cfg.report_one_if_negative = sc.report_neg;
      cfg.replications = sc.reps;
      bool stochastic = true;
      if (srs) {
        cfg.response = scenario::SrsResponse{sc.srs_size};
      } else {
        cfg.response = scenario::GroupResponse{sc.respond_pos, sc.respond_neg};
        auto deg = [](double p) { return p == 0.0 || p == 1.0; };
        stochastic = !(deg(sc.respond_pos) && deg(sc.respond_neg));
      }
      const RngSeed seed = stochastic ? need_seed(sh, err) : RngSeed{0};
      write_table(scenario_table("custom", scenario::evaluate(cfg, seed)), sh, out);
    });
  }

  // ---- tau ----
  struct {
    std::string file_a, file_b;
    FileFlags ff;
  } ta;
  {
    CLI::App* cmd = app.add_subcommand("tau", "Kendall tau-b between two panels");
    cmd->require_subcommand(1);
    cmd->fallthrough();

    CLI::App* cross = cmd->add_subcommand(
        "cross", "per-date tau across the geos shared by both panels");
    CLI::App* temporal = cmd->add_subcommand(
        "temporal", "per-geo tau across the dates shared by both panels");
    for (CLI::App* sub : {cross, temporal}) {
      sub->add_option("--a", ta.file_a, "first panel CSV")->required();
      sub->add_option("--b", ta.file_b, "second panel CSV")->required();
      add_file_flags(sub, ta.ff);
    }
    on(cross, [&] {
      const core::PanelSeries a = load_panel(ta.file_a, ta.ff, sh, "a", err);
      const core::PanelSeries b = load_panel(ta.file_b, ta.ff, sh, "b", err);
      Table t;
      t.columns = {"date", "tau", "n_geos"};
      for (const auto& row : ranking::cross_sectional_tau(a, b)) {
        t.rows.push_back(
            {Cell::str(row.date.to_string()), Cell::num(row.tau), Cell::count(row.n_geos)});
      }
      write_table(t, sh, out);
    });
    on(temporal, [&] {
      const core::PanelSeries a = load_panel(ta.file_a, ta.ff, sh, "a", err);
      const core::PanelSeries b = load_panel(ta.file_b, ta.ff, sh, "b", err);
      Table t;
      t.columns = {"geo", "tau", "n_dates"};
      for (const auto& row : ranking::temporal_tau(a, b)) {
        t.rows.push_back({Cell::str(row.geo), Cell::num(row.tau), Cell::count(row.n_dates)});
      }
      write_table(t, sh, out);
    });
  }

  // ---- rank-sim ----
  struct {
    std::string truth_path;
    std::string delimiter = ",";
    std::int64_t n = 0;
    int reps = 1000;
  } rs;
  {
    CLI::App* cmd = app.add_subcommand(
        "rank-sim", "expected Kendall tau between simulated estimates and the truth ranking");
    cmd->add_option("--truth", rs.truth_path, "truth CSV (geo,population,true_rate)")
        ->required();
    cmd->add_option("--n", rs.n, "national sample size")->required();
    cmd->add_option("--reps", rs.reps, "replications")->capture_default_str();
    cmd->add_option("--delimiter", rs.delimiter, "truth file delimiter")->capture_default_str();
    on(cmd, [&] {
      ranking::RankSimConfig cfg;
      cfg.truth = load_truth(rs.truth_path, rs.delimiter, sh);
      cfg.national_n = rs.n;
      cfg.replications = rs.reps;
      cfg.seed = need_seed(sh, err);
      cfg.threads = resolve_threads(sh);
      const ranking::TauSummary s = ranking::expected_tau(cfg);
      Table t;
      t.columns = {"mean_tau", "sd_tau", "replications_used", "dropped_replications",
                   "degenerate_truth"};
      t.rows.push_back({Cell::num(s.mean_tau), Cell::num(s.sd_tau),
                        Cell::count(s.replications_used), Cell::count(s.dropped_replications),
                        Cell::flag(s.degenerate_truth)});
      write_table(t, sh, out);
    });
  }

  // ---- rank-neff ----
  struct {
    std::string truth_path;
    std::string delimiter = ",";
    double target_tau = 0.0;
    std::int64_t n_lo = 0, n_hi = 0;
    double ratio = 1.05;
    int reps = 1000;
  } rn;
  {
    CLI::App* cmd = app.add_subcommand(
        "rank-neff", "smallest sample size whose expected tau reaches the target");
    cmd->add_option("--truth", rn.truth_path, "truth CSV (geo,population,true_rate)")
        ->required();
    cmd->add_option("--target-tau", rn.target_tau, "target expected tau in (0, 1)")->required();
    cmd->add_option("--n-lo", rn.n_lo, "search lower bound")->required();
    cmd->add_option("--n-hi", rn.n_hi, "search upper bound")->required();
    cmd->add_option("--ratio", rn.ratio, "geometric lattice step")->capture_default_str();
    cmd->add_option("--reps", rn.reps, "replications per candidate")->capture_default_str();
    cmd->add_option("--delimiter", rn.delimiter, "truth file delimiter")->capture_default_str();
    on(cmd, [&] {
      const std::vector<core::GeoTruth> truth = load_truth(rn.truth_path, rn.delimiter, sh);
      const std::int64_t n = ranking::required_sample_size(
          truth, rn.target_tau, rn.reps, need_seed(sh, err),
          ranking::SearchBounds{rn.n_lo, rn.n_hi}, rn.ratio, resolve_threads(sh));
      Table t;
      t.columns = {"required_n", "target_tau", "n_lo", "n_hi", "lattice_ratio", "replications"};
      t.rows.push_back({Cell::count(n), Cell::num(rn.target_tau), Cell::count(rn.n_lo),
                        Cell::count(rn.n_hi), Cell::num(rn.ratio), Cell::count(rn.reps)});
      write_table(t, sh, out);
    });
  }

  // ---- twogroup ----
  TwoGroupFlags tg;
  struct {
    double rho = 0.0;
    double rho_max = 0.9;
    int steps = 90;
    int reps = 1;
  } tw;
  {
    CLI::App* cmd = app.add_subcommand("twogroup", "two-group response-bias model");
    cmd->require_subcommand(1);
    cmd->fallthrough();

    CLI::App* curve = cmd->add_subcommand("curve", "ddc vs rho curve (headline defaults)");
    add_twogroup_flags(curve, tg, /*with_scale=*/true);
    curve->add_option("--rho-max", tw.rho_max, "largest rho on the grid")->capture_default_str();
    curve->add_option("--steps", tw.steps, "grid steps (emits steps+1 points)")
        ->capture_default_str();
    auto run_curve = [&] {
      write_table(curve_table(twogroup::ddc_curve(to_params(tg), rho_grid(tw.rho_max, tw.steps))),
                  sh, out);
    };
    on(curve, run_curve);

    CLI::App* sim = cmd->add_subcommand(
        "sim", "finite-population oracle draw(s) for the closed forms");
    add_twogroup_flags(sim, tg, /*with_scale=*/false);
    sim->add_option("--N", tg.N, "population size to materialize (<= 1e7)")->required();
    sim->add_option("--rho", tw.rho, "group 1 outcome rate")->required();
    sim->add_option("--reps", tw.reps, "number of seeded draws")->capture_default_str();
    on(sim, [&] {
      twogroup::TwoGroupParams p = to_params(tg);
      p.n = 1;  // ddc scaling is not used by the simulation
      const RngSeed seed = need_seed(sh, err);
      if (tw.reps < 1) throw Error(errc::domain_error, "--reps must be >= 1");
      Table t;
      t.columns = {"rep",         "empirical_bias",  "empirical_ddc",
                   "respondents", "respondent_mean", "population_mean"};
      for (int rep = 0; rep < tw.reps; ++rep) {
        const twogroup::SimResult r =
            twogroup::simulate_finite(p, tw.rho, derive_stream(seed, static_cast<std::uint64_t>(rep)));
        t.rows.push_back({Cell::count(rep), Cell::num(r.empirical_bias),
                          Cell::num(r.empirical_ddc), Cell::count(r.respondents),
                          Cell::num(r.respondent_mean), Cell::num(r.population_mean)});
      }
      write_table(t, sh, out);
    });

    CLI::App* slope = cmd->add_subcommand("slope", "respondent rate / true rate (rho-free)");
    add_twogroup_flags(slope, tg, /*with_scale=*/false);
    on(slope, [&] {
      twogroup::TwoGroupParams p = to_params(tg);
      p.N = 1;
      p.n = 1;  // scale-free operation
      Table t;
      t.columns = {"slope"};
      t.rows.push_back({Cell::num(twogroup::slope_vs_truth(p))});
      write_table(t, sh, out);
    });
  }

  // ---- avg7 ----
  struct {
    std::string in_path;
    int window = 7;
    FileFlags ff;
  } av;
  {
    CLI::App* cmd = app.add_subcommand("avg7", "trailing average over a day window, per geo");
    cmd->add_option("--in", av.in_path, "panel CSV")->required();
    cmd->add_option("--window", av.window, "window length in days")->capture_default_str();
    add_file_flags(cmd, av.ff);
    on(cmd, [&] {
      const core::PanelSeries p = load_panel(av.in_path, av.ff, sh, "in", err);
      const ingest::SmoothedPanel sp = ingest::trailing_average(p, av.window);
      Table t;
      t.columns = {"geo", "date", "value", "days_present"};
      for (std::size_t i = 0; i < sp.panel.entries.size(); ++i) {
        const auto& e = sp.panel.entries[i];
        t.rows.push_back({Cell::str(e.geo), Cell::str(e.date.to_string()), Cell::num(e.value),
                          Cell::count(sp.days_present[i])});
      }
      write_table(t, sh, out);
    });
  }

  // ---- repro ----
  struct {
    std::string truth_path;
    std::string delimiter = ",";
    std::int64_t n_lo = 500, n_hi = 32'000;
    double ratio = 2.0;
    int reps = 1000;
    std::string survey_path, benchmark_path;
    int window = 7;
    FileFlags ff;
  } rp;
  {
    CLI::App* cmd =
        app.add_subcommand("repro", "figure-data recipes (tidy tables, no rendering)");
    cmd->require_subcommand(1);
    cmd->fallthrough();

    CLI::App* power = cmd->add_subcommand(
        "fig-rank-power", "expected tau vs national sample size (synthetic or user truth)");
    power->add_option("--truth", rp.truth_path,
                      "truth CSV (geo,population,true_rate); omit for the built-in synthetic set");
    power->add_option("--n-lo", rp.n_lo, "smallest sample size")->capture_default_str();
    power->add_option("--n-hi", rp.n_hi, "largest sample size")->capture_default_str();
    power->add_option("--ratio", rp.ratio, "geometric grid step")->capture_default_str();
    power->add_option("--reps", rp.reps, "replications per grid point")->capture_default_str();
    power->add_option("--delimiter", rp.delimiter, "truth file delimiter")
        ->capture_default_str();
    on(power, [&] {
      ranking::RankSimConfig cfg;
      cfg.truth = rp.truth_path.empty() ? synthetic_truth()
                                        : load_truth(rp.truth_path, rp.delimiter, sh);
      cfg.replications = rp.reps;
      cfg.seed = need_seed(sh, err);  // common random numbers across grid points
      cfg.threads = resolve_threads(sh);
      Table t;
      t.columns = {"n", "mean_tau", "sd_tau", "replications_used", "dropped_replications"};
      for (std::int64_t n : ranking::geometric_lattice(rp.n_lo, rp.n_hi, rp.ratio)) {
        cfg.national_n = n;
        const ranking::TauSummary s = ranking::expected_tau(cfg);
        t.rows.push_back({Cell::count(n), Cell::num(s.mean_tau), Cell::num(s.sd_tau),
                          Cell::count(s.replications_used),
                          Cell::count(s.dropped_replications)});
      }
      write_table(t, sh, out);
    });

    CLI::App* ddc = cmd->add_subcommand("fig-ddc-curve", "ddc vs rho at the headline parameters");
    add_twogroup_flags(ddc, tg, /*with_scale=*/true);
    ddc->add_option("--rho-max", tw.rho_max, "largest rho on the grid")->capture_default_str();
    ddc->add_option("--steps", tw.steps, "grid steps (emits steps+1 points)")
        ->capture_default_str();
    on(ddc, [&] {
      write_table(curve_table(twogroup::ddc_curve(to_params(tg), rho_grid(tw.rho_max, tw.steps))),
                  sh, out);
    });

    CLI::App* corr = cmd->add_subcommand(
        "fig-corr-panel", "smoothed cross-sectional and temporal tau between two panels");
    corr->add_option("--survey", rp.survey_path, "survey panel CSV")->required();
    corr->add_option("--benchmark", rp.benchmark_path, "benchmark panel CSV")->required();
    corr->add_option("--window", rp.window, "trailing average window in days")
        ->capture_default_str();
    add_file_flags(corr, rp.ff);
    on(corr, [&] {
      const core::PanelSeries a = load_panel(rp.survey_path, rp.ff, sh, "survey", err);
      const core::PanelSeries b = load_panel(rp.benchmark_path, rp.ff, sh, "benchmark", err);
      const core::PanelSeries sa = ingest::trailing_average(a, rp.window).panel;
      const core::PanelSeries sb = ingest::trailing_average(b, rp.window).panel;
      Table t;
      t.columns = {"kind", "key", "tau", "n_items"};
      for (const auto& row : ranking::cross_sectional_tau(sa, sb)) {
        t.rows.push_back({Cell::str("cross"), Cell::str(row.date.to_string()),
                          Cell::num(row.tau), Cell::count(row.n_geos)});
      }
      for (const auto& row : ranking::temporal_tau(sa, sb)) {
        t.rows.push_back({Cell::str("temporal"), Cell::str(row.geo), Cell::num(row.tau),
                          Cell::count(row.n_dates)});
      }
      write_table(t, sh, out);
    });
  }

  // ---- parse and dispatch ----
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    for (const auto& [leaf, fn] : handlers) {
      if (leaf->get_parent()->got_subcommand(leaf)) {
        fn();
        return 0;
      }
    }
    err << "no subcommand selected\n";
    return 2;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "{\"code\":\"" << json_escape(e.code()) << "\",\"message\":\"" << json_escape(e.what())
        << "\"}\n";
    return 1;
  } catch (const std::exception& e) {
    err << "{\"code\":\"internal\",\"message\":\"" << json_escape(e.what()) << "\"}\n";
    return 1;
  }
}

}  // namespace surveydx::cli
