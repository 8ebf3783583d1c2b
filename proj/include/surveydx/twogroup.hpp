#ifndef SURVEYDX_TWOGROUP_HPP
#define SURVEYDX_TWOGROUP_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "surveydx/rng.hpp"

namespace surveydx::twogroup {

// Two-group response-bias model. The population splits into group 1 (share
// eta) and group 2; group 2 members are 1/b times as likely to hold the
// positive outcome and 1/gamma times as likely to respond. base_response is
// group 1's response probability. N and n set the ddc scaling (sampling
// fraction f = n/N).
struct TwoGroupParams {
  double eta = 0.5;
  double b = 1.0;      // differential outcome rate, >= 1
  double gamma = 1.0;  // differential response rate, >= 1
  double base_response = 0.02;
  std::int64_t N = 0;
  std::int64_t n = 0;
};

void validate(const TwoGroupParams& p);  // throws domain_error

// Population rate: eta*rho + (1-eta)*rho/b.
double true_rate(const TwoGroupParams& p, double rho);

// Rate among respondents, via the Bayes mixture with weights proportional to
// group share x response rate.
double respondent_rate(const TwoGroupParams& p, double rho);

// Same quantity in closed form, (rho + (b*gamma - 1)*eta*rho) / (b + (gamma - 1)*b*eta);
// kept separate as an algebraic cross-check of respondent_rate.
double respondent_rate_closed_form(const TwoGroupParams& p, double rho);

// respondent_rate - true_rate, by direct subtraction. Nonnegative for
// b, gamma >= 1 and linear in rho.
double expected_bias(const TwoGroupParams& p, double rho);

// Factored form [(b-1)(gamma-1)(1-eta)eta / (b + (gamma-1) b eta)] * rho,
// exposed as a cross-check of expected_bias.
double expected_bias_factored(const TwoGroupParams& p, double rho);

struct CurvePoint {
  double rho = 0.0;
  double true_rate = 0.0;
  double respondent_rate = 0.0;
  double bias = 0.0;  // respondent_rate - true_rate, exactly
  double ddc = 0.0;
};

// ddc across a rho grid, using sigma = sqrt(true_rate * (1 - true_rate)) (the
// model-implied Bernoulli population SD) and f = n/N. Grid points where the
// true rate is 0 or 1 carry zero bias and emit ddc = 0.
std::vector<CurvePoint> ddc_curve(const TwoGroupParams& p, std::span<const double> rho_grid);

// respondent_rate / true_rate, constant in rho:
// (1 + (b*gamma - 1)*eta) / ((1 + (gamma - 1)*eta) * (1 + (b - 1)*eta)); >= 1.
double slope_vs_truth(const TwoGroupParams& p);

struct SimResult {
  double empirical_bias = 0.0;
  double empirical_ddc = 0.0;
  std::int64_t respondents = 0;
  double respondent_mean = 0.0;
  double population_mean = 0.0;
  double population_sd = 0.0;  // 1/N convention
};

// Finite-population oracle for the closed forms: draws N individuals with
// (group, outcome, response) per the model (response independent of outcome
// given group; realized respondent count is random), then returns the realized
// bias and the exact corr(R, Y). Requires N <= 1e7. Errors: no_respondents if
// the realized sample is empty.
SimResult simulate_finite(const TwoGroupParams& p, double rho, RngSeed seed);

}  // namespace surveydx::twogroup

#endif  // SURVEYDX_TWOGROUP_HPP
