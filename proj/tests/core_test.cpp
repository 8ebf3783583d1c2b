#include <cstdint>
#include <vector>

#include "doctest.h"
#include "surveydx/core.hpp"
#include "surveydx/error.hpp"
#include "surveydx/rng.hpp"
#include "test_util.hpp"

using surveydx::CounterRng;
using surveydx::RngSeed;
using surveydx::derive_stream;
using namespace surveydx::core;
using testutil::thrown_code;

TEST_CASE("date parses and round-trips") {
  const Date d = Date::parse("2021-03-27");
  CHECK(d.to_string() == "2021-03-27");
  CHECK(Date::parse("2020-02-29").to_string() == "2020-02-29");  // leap day
  CHECK(Date::parse("0001-01-01").to_string() == "0001-01-01");
}

TEST_CASE("date rejects malformed and nonexistent inputs") {
  for (const char* bad : {"2021-3-27", "2021/03/27", "21-03-27", "2021-03-27 ", "2021-13-01",
                          "2021-00-10", "2021-04-31", "2021-02-29", "abcd-ef-gh", ""}) {
    CHECK_MESSAGE(thrown_code([&] { Date::parse(bad); }) == surveydx::errc::parse_error, bad);
  }
}

TEST_CASE("date arithmetic") {
  const Date d = Date::parse("2021-02-26");
  CHECK(d.plus_days(3).to_string() == "2021-03-01");
  CHECK(d.plus_days(-1).to_string() == "2021-02-25");
  CHECK(d.plus_days(3) - d == 3);
  CHECK(d - d.plus_days(3) == -3);
  CHECK(Date::parse("2021-01-02") < Date::parse("2021-01-03"));
}

TEST_CASE("validate_panel sorts by geo then date") {
  std::vector<PanelEntry> entries{
      {"NY", Date::parse("2021-01-02"), 2.0, {}},
      {"CA", Date::parse("2021-01-03"), 3.0, {}},
      {"CA", Date::parse("2021-01-01"), 1.0, {}},
  };
  const PanelSeries p = validate_panel(std::move(entries), "demo");
  REQUIRE(p.entries.size() == 3);
  CHECK(p.entries[0].geo == "CA");
  CHECK(p.entries[0].value == 1.0);
  CHECK(p.entries[1].geo == "CA");
  CHECK(p.entries[1].value == 3.0);
  CHECK(p.entries[2].geo == "NY");
  CHECK(p.name == "demo");
}

TEST_CASE("validate_panel rejects bad cells") {
  const Date d = Date::parse("2021-01-01");
  CHECK(thrown_code([&] {
          validate_panel({{"CA", d, 1.0, {}}, {"CA", d, 2.0, {}}}, "p");
        }) == surveydx::errc::duplicate_cell);
  CHECK(thrown_code([&] {
          validate_panel({{"CA", d, std::nan(""), {}}}, "p");
        }) == surveydx::errc::non_finite);
  CHECK(thrown_code([&] {
          validate_panel({{"CA", d, 1.0, std::int64_t{0}}}, "p");
        }) == surveydx::errc::bad_sample_size);
}

TEST_CASE("validate_truth rejects inconsistent rows") {
  CHECK(thrown_code([] {
          std::vector<GeoTruth> t{{"CA", 0, 0.5}};
          validate_truth(t);
        }) == surveydx::errc::domain_error);
  CHECK(thrown_code([] {
          std::vector<GeoTruth> t{{"CA", 10, 1.5}};
          validate_truth(t);
        }) == surveydx::errc::domain_error);
  CHECK(thrown_code([] {
          std::vector<GeoTruth> t{{"CA", 10, 0.5}, {"CA", 20, 0.6}};
          validate_truth(t);
        }) == surveydx::errc::domain_error);
  std::vector<GeoTruth> ok{{"CA", 10, 0.5}, {"NY", 20, 0.6}};
  CHECK_NOTHROW(validate_truth(ok));
}

TEST_CASE("counter rng is deterministic per seed and stream") {
  CounterRng a(RngSeed{42});
  CounterRng b(RngSeed{42});
  CounterRng c(RngSeed{43});
  bool all_equal = true;
  bool any_differ = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_differ = any_differ || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_differ);
  CHECK(derive_stream(RngSeed{42}, 0).value == derive_stream(RngSeed{42}, 0).value);
  CHECK(derive_stream(RngSeed{42}, 0).value != derive_stream(RngSeed{42}, 1).value);
  CHECK(derive_stream(RngSeed{42}, 0).value != derive_stream(RngSeed{43}, 0).value);
}

TEST_CASE("uniform01 stays in [0, 1) and covers the range") {
  CounterRng rng(RngSeed{7});
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("binomial edge cases and bounds") {
  CounterRng rng(RngSeed{11});
  CHECK(rng.binomial(0, 0.5) == 0);
  CHECK(rng.binomial(100, 0.0) == 0);
  CHECK(rng.binomial(100, 1.0) == 100);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t x = rng.binomial(50, 0.7);
    REQUIRE(x >= 0);
    REQUIRE(x <= 50);
  }
  CHECK(thrown_code([&] { rng.binomial(-1, 0.5); }) == surveydx::errc::domain_error);
  CHECK(thrown_code([&] { rng.binomial(5, std::nan("")); }) == surveydx::errc::domain_error);
}

TEST_CASE("binomial matches its mean and variance") {
  CounterRng rng(RngSeed{12});
  const int reps = 20000;
  const std::int64_t n = 50;
  const double p = 0.3;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double x = static_cast<double>(rng.binomial(n, p));
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / reps;
  const double var = sum_sq / reps - mean * mean;
  const double true_mean = n * p;                  // 15
  const double true_var = n * p * (1.0 - p);       // 10.5
  const double se_mean = std::sqrt(true_var / reps);
  CHECK(std::abs(mean - true_mean) < 5.0 * se_mean);
  CHECK(std::abs(var - true_var) < 0.05 * true_var);
}

TEST_CASE("hypergeometric bounds, exhaustive draw, and mean") {
  CounterRng rng(RngSeed{13});
  CHECK(rng.hypergeometric(10, 4, 10) == 4);  // drawing everything finds every success
  CHECK(rng.hypergeometric(10, 0, 5) == 0);
  CHECK(rng.hypergeometric(10, 10, 5) == 5);
  const int reps = 20000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) {
    const std::int64_t x = rng.hypergeometric(100, 30, 20);
    REQUIRE(x >= 0);
    REQUIRE(x <= 20);
    sum += static_cast<double>(x);
  }
  const double mean = sum / reps;  // expect 20 * 30/100 = 6
  CHECK(std::abs(mean - 6.0) < 0.1);
  CHECK(thrown_code([&] { rng.hypergeometric(10, 11, 5); }) == surveydx::errc::domain_error);
  CHECK(thrown_code([&] { rng.hypergeometric(10, 5, 11); }) == surveydx::errc::domain_error);
}

TEST_CASE("multinomial conserves the total and respects zero weights") {
  CounterRng rng(RngSeed{14});
  const std::vector<double> weights{3.0, 0.0, 1.0, 6.0};
  for (int i = 0; i < 200; ++i) {
    const std::vector<std::int64_t> counts = rng.multinomial(1000, weights);
    REQUIRE(counts.size() == weights.size());
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
      REQUIRE(c >= 0);
      total += c;
    }
    CHECK(total == 1000);
    CHECK(counts[1] == 0);
  }
  CHECK(thrown_code([&] {
          const std::vector<double> w{0.0, 0.0};
          rng.multinomial(10, w);
        }) == surveydx::errc::domain_error);
  CHECK(thrown_code([&] {
          const std::vector<double> w{1.0, -1.0};
          rng.multinomial(10, w);
        }) == surveydx::errc::domain_error);
}

TEST_CASE("bernoulli respects degenerate probabilities") {
  CounterRng rng(RngSeed{15});
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
}
