#include "surveydx/rng.hpp"

#include <cmath>

#include "surveydx/error.hpp"

namespace surveydx {

std::int64_t CounterRng::binomial(std::int64_t n, double p) {
  if (n < 0 || !std::isfinite(p)) {
    throw Error(errc::domain_error, "binomial requires n >= 0 and finite p");
  }
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial(n, 1.0 - p);

  // Skip geometric gaps between successes: the number of failures before the
  // next success is floor(log(U) / log(1 - p)).
  const double c = std::log1p(-p);
  std::int64_t count = 0;
  double pos = 0.0;
  for (;;) {
    const double u = 1.0 - uniform01();  // (0, 1]
    pos += std::floor(std::log(u) / c) + 1.0;
    if (pos > static_cast<double>(n)) break;
    ++count;
  }
  return count;
}

std::int64_t CounterRng::hypergeometric(std::int64_t population, std::int64_t successes,
                                        std::int64_t draws) {
  if (population < 0 || successes < 0 || successes > population || draws < 0 ||
      draws > population) {
    throw Error(errc::domain_error, "hypergeometric arguments out of range");
  }
  std::int64_t hits = 0;
  std::int64_t remaining = population;
  std::int64_t marked = successes;
  for (std::int64_t i = 0; i < draws; ++i) {
    if (uniform01() * static_cast<double>(remaining) < static_cast<double>(marked)) {
      ++hits;
      --marked;
    }
    --remaining;
  }
  return hits;
}

std::vector<std::int64_t> CounterRng::multinomial(std::int64_t n,
                                                  std::span<const double> weights) {
  if (n < 0) throw Error(errc::domain_error, "multinomial requires n >= 0");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(errc::domain_error, "multinomial weights must be nonnegative");
    }
    total += w;
  }
  if (weights.empty() || total <= 0.0) {
    throw Error(errc::domain_error, "multinomial requires positive total weight");
  }

  std::vector<std::int64_t> counts(weights.size(), 0);
  std::int64_t remaining = n;
  double mass = total;
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    if (remaining == 0) break;
    if (mass <= 0.0) break;  // rounding exhausted the mass; leftovers go last
    double p = weights[k] / mass;
    if (p > 1.0) p = 1.0;
    counts[k] = binomial(remaining, p);
    remaining -= counts[k];
    mass -= weights[k];
  }
  counts.back() += remaining;
  return counts;
}

}  // namespace surveydx
