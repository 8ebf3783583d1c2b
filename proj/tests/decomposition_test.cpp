#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "surveydx/decomposition.hpp"
#include "surveydx/error.hpp"
#include "test_util.hpp"

using namespace surveydx::decomp;
using testutil::thrown_code;

namespace {

DecompositionInput demo_input() {
  DecompositionInput in;
  in.sample_mean = 0.6;
  in.pop_mean = 0.5;
  in.n = 2500;
  in.N = 1'000'000;
  in.sigma = 0.5;
  return in;
}

// Independent Pearson correlation: accumulate raw sums, then normalize.
double pearson_oracle(const std::vector<double>& y, const std::vector<std::uint8_t>& r) {
  const double n = static_cast<double>(y.size());
  double sy = 0.0, sr = 0.0, syy = 0.0, srr = 0.0, syr = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double ri = r[i] ? 1.0 : 0.0;
    sy += y[i];
    sr += ri;
    syy += y[i] * y[i];
    srr += ri * ri;
    syr += y[i] * ri;
  }
  const double cov = syr / n - (sy / n) * (sr / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  const double vr = srr / n - (sr / n) * (sr / n);
  return cov / std::sqrt(vy * vr);
}

}  // namespace

TEST_CASE("ddc estimate matches the defining ratio") {
  const DecompositionInput in = demo_input();
  const double f = 2500.0 / 1'000'000.0;
  const double expected = (0.6 - 0.5) / (0.5 * std::sqrt((1.0 - f) / f));
  CHECK(ddc_estimate(in) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("decompose_error terms multiply back to the error") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> mean_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> sigma_dist(0.05, 3.0);
  std::uniform_int_distribution<std::int64_t> n_dist(1, 9999);
  for (int i = 0; i < 200; ++i) {
    DecompositionInput in;
    in.N = 10000;
    in.n = n_dist(gen);
    in.sample_mean = mean_dist(gen);
    in.pop_mean = mean_dist(gen);
    in.sigma = sigma_dist(gen);
    const DecompositionResult r = decompose_error(in);
    const double rebuilt = error_from_terms(r.ddc, in.n, in.N, in.sigma);
    CHECK(rebuilt == doctest::Approx(r.error).epsilon(1e-12));
    CHECK(r.quantity_term == doctest::Approx(std::sqrt(
                                 (1.0 - static_cast<double>(in.n) / 10000.0) /
                                 (static_cast<double>(in.n) / 10000.0)))
                                 .epsilon(1e-14));
    CHECK(r.difficulty_term == in.sigma);
  }
}

TEST_CASE("full sample and zero sigma edge cases") {
  DecompositionInput in = demo_input();
  in.n = in.N;
  in.sample_mean = in.pop_mean;
  CHECK(ddc_estimate(in) == 0.0);
  CHECK(z_statistic(in) == 0.0);
  in.sample_mean = in.pop_mean + 0.1;
  CHECK(thrown_code([&] { ddc_estimate(in); }) == surveydx::errc::full_sample);
  CHECK(thrown_code([&] { z_statistic(in); }) == surveydx::errc::full_sample);

  in = demo_input();
  in.sigma = 0.0;
  CHECK(thrown_code([&] { ddc_estimate(in); }) == surveydx::errc::zero_difficulty);

  in = demo_input();
  in.n = 0;
  CHECK(thrown_code([&] { ddc_estimate(in); }) == surveydx::errc::domain_error);
  in.n = in.N + 1;
  CHECK(thrown_code([&] { ddc_estimate(in); }) == surveydx::errc::domain_error);
}

TEST_CASE("out-of-range ddc is flagged, not silently clamped") {
  DecompositionInput in = demo_input();
  in.sample_mean = in.pop_mean + 40.0;  // way beyond what any correlation allows
  const DecompositionResult r = decompose_error(in);
  CHECK(r.out_of_range);
  CHECK(std::abs(r.ddc) > 1.0);
  CHECK_FALSE(decompose_error(demo_input()).out_of_range);
}

TEST_CASE("effective sample size fixture and cap") {
  // sigma 0.5, error 0.05, N 10000: 0.25 / (0.0025 + 0.000025)
  const double expected = 0.25 / (0.0025 + 0.25 / 10000.0);
  CHECK(effective_sample_size(0.05, 0.5, 10000) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(effective_sample_size(0.0, 0.5, 10000) == 10000.0);    // capped at N
  CHECK(effective_sample_size(1e-9, 0.5, 10000) == doctest::Approx(10000.0).epsilon(1e-9));
  CHECK(thrown_code([] { effective_sample_size(0.1, 0.0, 100); }) ==
        surveydx::errc::zero_difficulty);
  CHECK(thrown_code([] { effective_sample_size(0.1, 0.5, 0); }) == surveydx::errc::domain_error);
}

TEST_CASE("z statistic equals ddc scaled by sqrt(N)") {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> mean_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> sigma_dist(0.05, 2.0);
  std::uniform_int_distribution<std::int64_t> big_n(100, 1'000'000);
  for (int i = 0; i < 300; ++i) {
    DecompositionInput in;
    in.N = big_n(gen);
    in.n = std::uniform_int_distribution<std::int64_t>(1, in.N - 1)(gen);
    in.sample_mean = mean_dist(gen);
    in.pop_mean = mean_dist(gen);
    in.sigma = sigma_dist(gen);
    const double z = z_statistic(in);
    const double via_ddc = ddc_estimate(in) * std::sqrt(static_cast<double>(in.N));
    CHECK(z == doctest::Approx(via_ddc).epsilon(1e-12));
  }
}

TEST_CASE("finite population ddc matches a direct Pearson computation") {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 500)(gen);
    FinitePopulation pop;
    pop.y.resize(n);
    pop.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pop.y[i] = std::normal_distribution<double>(0.0, 1.0)(gen);
      pop.r[i] = std::bernoulli_distribution(0.4)(gen) ? 1 : 0;
    }
    pop.r[0] = 1;  // guarantee both response levels exist
    pop.r[1] = 0;
    CHECK(finite_population_ddc(pop) ==
          doctest::Approx(pearson_oracle(pop.y, pop.r)).epsilon(1e-10));
  }
}

TEST_CASE("finite population ddc rejects degenerate inputs") {
  FinitePopulation pop;
  pop.y = {1.0, 1.0, 1.0};
  pop.r = {1, 0, 1};
  CHECK(thrown_code([&] { finite_population_ddc(pop); }) ==
        surveydx::errc::degenerate_variance);
  pop.y = {1.0, 2.0, 3.0};
  pop.r = {1, 1, 1};
  CHECK(thrown_code([&] { finite_population_ddc(pop); }) ==
        surveydx::errc::degenerate_variance);
  pop.r = {1, 1};
  CHECK(thrown_code([&] { finite_population_ddc(pop); }) == surveydx::errc::length_mismatch);
}

TEST_CASE("error identity holds exactly on finite populations") {
  std::mt19937_64 gen(2024);
  for (int rep = 0; rep < 50; ++rep) {
    const std::int64_t n = std::uniform_int_distribution<std::int64_t>(10, 2000)(gen);
    FinitePopulation pop;
    pop.y.resize(static_cast<std::size_t>(n));
    pop.r.assign(static_cast<std::size_t>(n), 0);
    for (auto& v : pop.y) v = std::uniform_real_distribution<double>(0.0, 10.0)(gen);
    const std::int64_t m = std::uniform_int_distribution<std::int64_t>(1, n - 1)(gen);
    for (std::int64_t i = 0; i < m; ++i) pop.r[static_cast<std::size_t>(i)] = 1;
    std::shuffle(pop.r.begin(), pop.r.end(), gen);

    const PopulationStats st = population_stats(pop);
    const double f = static_cast<double>(st.respondents) / static_cast<double>(n);
    const double direct = st.respondent_mean - st.pop_mean;
    const double recomposed =
        finite_population_ddc(pop) * std::sqrt((1.0 - f) / f) * st.pop_sd;
    CHECK(recomposed == doctest::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("population stats fixture") {
  FinitePopulation pop;
  pop.y = {1.0, 2.0, 3.0, 4.0};
  pop.r = {0, 1, 1, 0};
  const PopulationStats st = population_stats(pop);
  CHECK(st.pop_mean == 2.5);
  CHECK(st.respondents == 2);
  CHECK(st.respondent_mean == 2.5);
  CHECK(st.pop_sd == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
}

TEST_CASE("binary correlation agrees with the materialized population") {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 100; ++rep) {
    const std::int64_t n = std::uniform_int_distribution<std::int64_t>(4, 300)(gen);
    FinitePopulation pop;
    pop.y.resize(static_cast<std::size_t>(n));
    pop.r.resize(static_cast<std::size_t>(n));
    std::int64_t n_x = 0, n_y = 0, n_xy = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const bool x = std::bernoulli_distribution(0.5)(gen);
      const bool y = std::bernoulli_distribution(0.3)(gen);
      pop.y[static_cast<std::size_t>(i)] = x ? 1.0 : 0.0;
      pop.r[static_cast<std::size_t>(i)] = y ? 1 : 0;
      n_x += x;
      n_y += y;
      n_xy += x && y;
    }
    if (n_x == 0 || n_x == n || n_y == 0 || n_y == n) continue;  // degenerate margin
    CHECK(binary_correlation(n, n_x, n_y, n_xy) ==
          doctest::Approx(finite_population_ddc(pop)).epsilon(1e-10));
  }
}

TEST_CASE("binary correlation rejects impossible tables") {
  CHECK(thrown_code([] { binary_correlation(10, 4, 5, 6); }) == surveydx::errc::domain_error);
  CHECK(thrown_code([] { binary_correlation(10, 11, 5, 2); }) == surveydx::errc::domain_error);
  CHECK(thrown_code([] { binary_correlation(10, 9, 9, 7); }) == surveydx::errc::domain_error);
  CHECK(thrown_code([] { binary_correlation(10, 0, 5, 0); }) ==
        surveydx::errc::degenerate_variance);
  CHECK(binary_correlation(4, 2, 2, 2) == 1.0);
  CHECK(binary_correlation(4, 2, 2, 0) == -1.0);
}
