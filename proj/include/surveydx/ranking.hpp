#ifndef SURVEYDX_RANKING_HPP
#define SURVEYDX_RANKING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surveydx/core.hpp"
#include "surveydx/rng.hpp"

namespace surveydx::ranking {

// Kendall tau-b (tie corrected), O(n log n) via merge-sort inversion counting.
// Errors: length_mismatch on unequal lengths or n < 2; all_ties if either
// vector is constant.
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct DateTauRow {
  core::Date date;
  double tau = 0.0;
  int n_geos = 0;
};

struct GeoTauRow {
  std::string geo;
  double tau = 0.0;
  int n_dates = 0;
};

// Per-date correlation across geos shared by both panels. A date qualifies
// when it has >= 3 shared geos and tau is defined there (neither side
// constant). Errors: no_overlap if no date qualifies.
std::vector<DateTauRow> cross_sectional_tau(const core::PanelSeries& a,
                                            const core::PanelSeries& b);

// Per-geo correlation across dates shared by both panels; mirror of
// cross_sectional_tau with the roles of geo and date swapped.
std::vector<GeoTauRow> temporal_tau(const core::PanelSeries& a, const core::PanelSeries& b);

struct StateEstimate {
  std::string geo;
  std::int64_t respondents = 0;
  std::optional<double> estimate;  // absent when the geo drew no respondents
};

// One national SRS: allocates national_n respondents over geos by a single
// multinomial draw with probabilities population/total, then estimates each
// geo's rate as Binomial(n_g, true_rate) / n_g. Respondent counts sum to
// national_n exactly.
std::vector<StateEstimate> simulate_state_estimates(std::span<const core::GeoTruth> truth,
                                                    std::int64_t national_n,
                                                    CounterRng& rng);

struct RankSimConfig {
  std::vector<core::GeoTruth> truth;  // at least 3 geos
  std::int64_t national_n = 0;
  int replications = 1000;
  RngSeed seed;
  int threads = 1;
};

struct TauSummary {
  double mean_tau = 0.0;
  double sd_tau = 0.0;  // sample SD over used replications
  int replications_used = 0;
  int dropped_replications = 0;
  // True when all true rates are equal: per-replication taus are then taken
  // against the geo-order ranking (expectation 0 under the exchangeable null)
  // since tau-b against a constant vector is undefined.
  bool degenerate_truth = false;
};

// Mean and SD of kendall_tau(estimates, true rates) over replications.
// Replications with a zero-respondent geo or all-tied estimates are dropped
// and counted. Per-replication seeds are derived from config.seed, so results
// are independent of thread scheduling. Errors: all_replications_dropped.
TauSummary expected_tau(const RankSimConfig& config);

struct SearchBounds {
  std::int64_t n_lo = 0;
  std::int64_t n_hi = 0;
};

// Strictly increasing integer lattice from lo to hi with ratio steps
// (endpoints included).
std::vector<std::int64_t> geometric_lattice(std::int64_t lo, std::int64_t hi, double ratio);

// Smallest lattice n with expected_tau(n).mean_tau >= target_tau, by bisection
// on the lattice index under common random numbers (same seed for every
// candidate n). Errors: target_unreachable if the upper bound misses the
// target; bracket_invalid if the lower bound already reaches it.
std::int64_t required_sample_size(std::span<const core::GeoTruth> truth, double target_tau,
                                  int replications, RngSeed seed, SearchBounds bounds,
                                  double lattice_ratio = 1.05, int threads = 1);

}  // namespace surveydx::ranking

#endif  // SURVEYDX_RANKING_HPP
