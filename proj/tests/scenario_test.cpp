#include <cmath>

#include "doctest.h"
#include "surveydx/error.hpp"
#include "surveydx/scenario.hpp"
#include "test_util.hpp"

using surveydx::RngSeed;
using namespace surveydx::scenario;
using testutil::thrown_code;

TEST_CASE("misread scenario resolves in closed form to textbook values") {
  // Only positives respond (half the population), each reports 1 with
  // probability 1/2. Worked by hand: the estimator is a mean of 500000
  // Bernoulli(1/2) draws, so E = 0.5 = true rate (zero error, zero ddc) and
  // Var = 0.25/500000, exactly the SRS variance at the respondent count.
  const ScenarioConfig cfg = misread_config(1'000'000, 0.5, 0.5);
  const ScenarioResult r = evaluate(cfg, RngSeed{0});
  CHECK(r.closed_form);
  CHECK(r.replications_used == 0);
  CHECK(r.mean_estimate == 0.5);
  CHECK(r.mean_respondents == 500'000.0);
  CHECK(r.design_effect == 1.0);
  CHECK(r.true_corr == 1.0);  // responding and being positive coincide
  CHECK(r.ddc_hat == 0.0);
  // Seed is irrelevant in closed form.
  const ScenarioResult r2 = evaluate(cfg, RngSeed{999});
  CHECK(r2.mean_estimate == r.mean_estimate);
  CHECK(r2.design_effect == r.design_effect);
}

TEST_CASE("misread scenario with nothing misread is pure selection bias") {
  const ScenarioConfig cfg = misread_config(10'000, 0.0, 0.4);
  const ScenarioResult r = evaluate(cfg, RngSeed{0});
  CHECK(r.closed_form);
  CHECK(r.mean_estimate == 1.0);   // every respondent is a truthful positive
  CHECK(r.design_effect == 0.0);   // constant estimator
  CHECK(r.true_corr == 1.0);
  CHECK(r.ddc_hat > 0.0);
}

TEST_CASE("intimidating scenario: constant estimator, vanishing corr(R, Y)") {
  ScenarioConfig cfg = intimidating_config(10'000, 1'000, 0.5);
  cfg.replications = 500;
  const ScenarioResult r = evaluate(cfg, RngSeed{11});
  CHECK_FALSE(r.closed_form);
  CHECK(r.replications_used == 500);
  CHECK(r.mean_estimate == 1.0);
  CHECK(r.mean_respondents == 1'000.0);  // SRS size is fixed
  CHECK(r.design_effect == 0.0);
  // Plug-in ddc reads the whole 0.5 error as data defect.
  const double f = 0.1;
  CHECK(r.ddc_hat == doctest::Approx(std::sqrt(f / (1.0 - f))).epsilon(1e-12));
  // R is independent of Y under SRS; the average realized correlation is tiny.
  CHECK(std::abs(r.true_corr) < 3.0 / std::sqrt(10'000.0));
}

TEST_CASE("replicated group response approaches the Bayes estimate") {
  ScenarioConfig cfg;
  cfg.population_size = 20'000;
  cfg.true_rate = 0.3;
  cfg.response = GroupResponse{0.9, 0.1};
  cfg.replications = 3000;
  const ScenarioResult r = evaluate(cfg, RngSeed{5});
  CHECK_FALSE(r.closed_form);
  CHECK(r.replications_used == 3000);
  // Respondents are 90% of positives and 10% of negatives:
  // E[estimate] ~ 0.27 / (0.27 + 0.07).
  const double bayes = 0.27 / 0.34;
  CHECK(r.mean_estimate == doctest::Approx(bayes).epsilon(0.01));
  CHECK(r.mean_respondents == doctest::Approx(20'000 * 0.34).epsilon(0.01));
  CHECK(r.true_corr > 0.5);
  CHECK(r.ddc_hat > 0.0);
  CHECK(r.design_effect > 0.0);
}

TEST_CASE("evaluate is deterministic in the seed") {
  ScenarioConfig cfg = intimidating_config(5'000, 500, 0.4);
  cfg.replications = 200;
  const ScenarioResult a = evaluate(cfg, RngSeed{77});
  const ScenarioResult b = evaluate(cfg, RngSeed{77});
  const ScenarioResult c = evaluate(cfg, RngSeed{78});
  CHECK(a.true_corr == b.true_corr);
  CHECK(a.ddc_hat == b.ddc_hat);
  CHECK(a.design_effect == b.design_effect);
  CHECK(a.true_corr != c.true_corr);
}

TEST_CASE("scenario validation errors") {
  CHECK(thrown_code([] { evaluate(intimidating_config(1, 1, 0.5), RngSeed{0}); }) ==
        surveydx::errc::domain_error);
  CHECK(thrown_code([] { evaluate(intimidating_config(100, 0, 0.5), RngSeed{0}); }) ==
        surveydx::errc::bad_sample_size);
  CHECK(thrown_code([] { evaluate(intimidating_config(100, 101, 0.5), RngSeed{0}); }) ==
        surveydx::errc::bad_sample_size);
  CHECK(thrown_code([] { evaluate(intimidating_config(100, 10, 1.5), RngSeed{0}); }) ==
        surveydx::errc::domain_error);
  // A true rate that rounds to an empty or full population has no variance.
  CHECK(thrown_code([] { evaluate(intimidating_config(100, 10, 0.001), RngSeed{0}); }) ==
        surveydx::errc::degenerate_variance);
  CHECK(thrown_code([] { misread_config(100, 1.5, 0.5); }) == surveydx::errc::domain_error);
  CHECK(thrown_code([] {
          ScenarioConfig cfg = intimidating_config(100, 10, 0.5);
          cfg.replications = 1;
          evaluate(cfg, RngSeed{0});
        }) == surveydx::errc::domain_error);
  // Nobody responds: closed form has no estimator.
  CHECK(thrown_code([] {
          ScenarioConfig cfg;
          cfg.population_size = 100;
          cfg.true_rate = 0.5;
          cfg.response = GroupResponse{0.0, 0.0};
          evaluate(cfg, RngSeed{0});
        }) == surveydx::errc::no_respondents);
  // A census SRS leaves corr(R, Y) undefined in every replication.
  CHECK(thrown_code([] {
          ScenarioConfig cfg = intimidating_config(100, 100, 0.5);
          evaluate(cfg, RngSeed{0});
        }) == surveydx::errc::all_replications_dropped);
}

TEST_CASE("realize produces a population consistent with the config") {
  ScenarioConfig cfg = intimidating_config(500, 100, 0.4);
  const auto pop = realize(cfg, RngSeed{3});
  REQUIRE(pop.y.size() == 500);
  REQUIRE(pop.r.size() == 500);
  REQUIRE(pop.y_star.size() == 500);
  std::int64_t positives = 0;
  std::int64_t respondents = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    positives += pop.y[i] == 1.0;
    respondents += pop.r[i];
    if (pop.r[i]) {
      CHECK(pop.y_star[i] == 1.0);  // intimidating: everyone reports 1
    } else {
      CHECK(std::isnan(pop.y_star[i]));
    }
  }
  CHECK(positives == 200);
  CHECK(respondents == 100);  // SRS draws exactly the requested size
}

TEST_CASE("realized group response and the plug-in ddc") {
  ScenarioConfig cfg;
  cfg.population_size = 4'000;
  cfg.true_rate = 0.5;
  cfg.response = GroupResponse{1.0, 0.0};
  cfg.report_one_if_positive = 1.0;
  const auto pop = realize(cfg, RngSeed{9});
  std::int64_t respondents = 0;
  for (std::size_t i = 0; i < pop.r.size(); ++i) {
    respondents += pop.r[i];
    CHECK(pop.r[i] == (pop.y[i] == 1.0 ? 1 : 0));
  }
  CHECK(respondents == 2'000);
  // Respondents all report 1 truthfully; the estimate is 1, the truth is 0.5.
  const double ddc = reported_plugin_ddc(pop);
  CHECK(ddc > 0.0);
  const ScenarioResult m = scenario_metrics(pop, 0.0);
  CHECK(m.ddc_hat == ddc);
  CHECK(m.mean_estimate == 1.0);
  CHECK(m.mean_respondents == 2'000.0);
  CHECK(m.design_effect == 0.0);
  CHECK(m.true_corr == 1.0);
}

TEST_CASE("scenario metrics validates its inputs") {
  ScenarioConfig cfg = intimidating_config(200, 50, 0.5);
  const auto pop = realize(cfg, RngSeed{1});
  CHECK(thrown_code([&] { scenario_metrics(pop, -1.0); }) == surveydx::errc::domain_error);
  CHECK(thrown_code([&] { scenario_metrics(pop, std::nan("")); }) ==
        surveydx::errc::domain_error);
  surveydx::decomp::FinitePopulation empty;
  CHECK(thrown_code([&] { reported_plugin_ddc(empty); }) == surveydx::errc::length_mismatch);
}
