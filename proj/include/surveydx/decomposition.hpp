#ifndef SURVEYDX_DECOMPOSITION_HPP
#define SURVEYDX_DECOMPOSITION_HPP

#include <cstdint>
#include <vector>

#include "surveydx/error.hpp"

namespace surveydx::decomp {

// Inputs for the survey-error decomposition: an observed sample mean against a
// known population mean, with the sampling fraction f = n/N and the population
// standard deviation sigma (1/N convention).
struct DecompositionInput {
  double sample_mean = 0.0;
  double pop_mean = 0.0;
  std::int64_t n = 0;  // respondents
  std::int64_t N = 0;  // population size
  double sigma = 0.0;  // population SD of the outcome
};

// error == ddc * quantity_term * difficulty_term exactly. ddc is not clamped
// to [-1, 1]: the plug-in value can leave that range under measurement error,
// and out_of_range flags when it does.
struct DecompositionResult {
  double error = 0.0;            // sample_mean - pop_mean
  double ddc = 0.0;              // data quality
  double quantity_term = 0.0;    // sqrt((1 - f) / f)
  double difficulty_term = 0.0;  // sigma
  double n_eff = 0.0;
  bool out_of_range = false;
};

// Plug-in data defect correlation:
//   (sample_mean - pop_mean) / sqrt(sigma^2 (1 - f) / f).
// Errors: zero_difficulty if sigma == 0; full_sample if f == 1 with a nonzero
// error (returns 0 when f == 1 and the error is 0).
double ddc_estimate(const DecompositionInput& in);

// Splits the error into quality x quantity x difficulty and attaches the
// effective sample size.
DecompositionResult decompose_error(const DecompositionInput& in);

// Inverse of ddc_estimate: ddc * sqrt((1 - n/N) / (n/N)) * sigma.
double error_from_terms(double ddc, std::int64_t n, std::int64_t N, double sigma);

// Size m of the simple random sample whose expected error matches the one
// observed: solves (1 - m/N) sigma^2 / m = error^2, i.e.
// m = sigma^2 / (error^2 + sigma^2 / N), capped at N. error == 0 gives N (a
// census is the smallest SRS with zero expected error on a finite population).
double effective_sample_size(double error, double sigma, std::int64_t N);

// Z = (sample_mean - pop_mean) / sqrt((1 - f) sigma^2 / n). Algebraically
// equal to ddc_estimate * sqrt(N).
double z_statistic(const DecompositionInput& in);

// A fully enumerated population: outcome y_i per member, response indicator
// r_i, and optionally the reported value y_star_i (empty when absent).
struct FinitePopulation {
  std::vector<double> y;
  std::vector<std::uint8_t> r;
  std::vector<double> y_star;
};

// Exact Pearson correlation corr_i(r_i, y_i) over the population (1/N
// variance convention). Errors: degenerate_variance if y or r is constant;
// length_mismatch on unequal lengths.
double finite_population_ddc(const FinitePopulation& pop);

// Population summary used by the scenario evaluator and the two-group oracle.
struct PopulationStats {
  double pop_mean = 0.0;
  double pop_sd = 0.0;  // 1/N convention
  std::int64_t respondents = 0;
  double respondent_mean = 0.0;  // of y
};
PopulationStats population_stats(const FinitePopulation& pop);

// Pearson correlation of two binary indicators from their joint counts:
// population of n_total members, n_x with x=1, n_y with y=1, n_xy with both.
// Errors: degenerate_variance if either margin is constant.
double binary_correlation(std::int64_t n_total, std::int64_t n_x, std::int64_t n_y,
                          std::int64_t n_xy);

}  // namespace surveydx::decomp

#endif  // SURVEYDX_DECOMPOSITION_HPP
