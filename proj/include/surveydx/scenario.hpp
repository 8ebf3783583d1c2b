#ifndef SURVEYDX_SCENARIO_HPP
#define SURVEYDX_SCENARIO_HPP

#include <cstdint>
#include <variant>

#include "surveydx/decomposition.hpp"
#include "surveydx/rng.hpp"

namespace surveydx::scenario {

// Measurement-error scenarios: a binary population of size N with
// round(true_rate * N) positives, a response rule, and a reporting rule
// P(Y* = 1 | respond, Y). The evaluator contrasts the plug-in ddc computed
// from reported means with the true sampling correlation corr(R, Y) and with
// the design effect of the estimator.

// Simple random sample of fixed size (response is the sampling indicator).
struct SrsResponse {
  std::int64_t sample_size = 0;
};

// Independent response per member with a probability depending on Y.
struct GroupResponse {
  double respond_if_positive = 0.0;
  double respond_if_negative = 0.0;
};

using ResponseRule = std::variant<SrsResponse, GroupResponse>;

struct ScenarioConfig {
  std::int64_t population_size = 0;
  double true_rate = 0.5;
  ResponseRule response;
  double report_one_if_positive = 1.0;  // P(Y*=1 | respond, Y=1)
  double report_one_if_negative = 0.0;  // P(Y*=1 | respond, Y=0)
  int replications = 10000;             // design-effect replications (stochastic rules)
};

struct ScenarioResult {
  double ddc_hat = 0.0;        // plug-in from the mean reported estimate
  double true_corr = 0.0;      // corr(R, Y); mean over replications when R is random
  double design_effect = 0.0;  // Var(estimator) / (sigma_y^2 / respondents)
  double mean_estimate = 0.0;
  double mean_respondents = 0.0;
  int replications_used = 0;  // 0 when everything is closed form
  bool closed_form = false;
};

// All sampled individuals respond, everyone reports Y* = 1; the sampling
// itself is an SRS of size n.
ScenarioConfig intimidating_config(std::int64_t population_size, std::int64_t sample_size,
                                   double true_rate = 0.5);

// Only positives respond; each respondent reads the question backwards with
// probability misread_prob.
ScenarioConfig misread_config(std::int64_t population_size, double misread_prob = 0.5,
                              double true_rate = 0.5);

// Evaluates a scenario. Deterministic response rules (GroupResponse with 0/1
// probabilities) are handled in closed form; stochastic rules are replicated
// with per-replication seeds derived from `seed`.
ScenarioResult evaluate(const ScenarioConfig& config, RngSeed seed);

// Materializes one concrete draw of the scenario population (y, r, y_star).
// Positives occupy the leading indices; all computed statistics are invariant
// to this labeling.
decomp::FinitePopulation realize(const ScenarioConfig& config, RngSeed seed);

// Plug-in ddc for one realization: sample mean = reported mean over
// responders, population statistics taken from the true y.
double reported_plugin_ddc(const decomp::FinitePopulation& pop);

// Scenario triple for one realization given the estimator variance under the
// scenario's resampling law (closed form or replicated by the caller).
ScenarioResult scenario_metrics(const decomp::FinitePopulation& pop,
                                double estimator_variance);

}  // namespace surveydx::scenario

#endif  // SURVEYDX_SCENARIO_HPP
