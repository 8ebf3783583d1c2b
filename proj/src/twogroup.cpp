#include "surveydx/twogroup.hpp"

#include <cmath>

#include "surveydx/decomposition.hpp"
#include "surveydx/error.hpp"

namespace surveydx::twogroup {

namespace {

void check_rho(double rho) {
  if (!std::isfinite(rho) || rho < 0.0 || rho > 1.0) {
    throw Error(errc::domain_error, "rho must lie in [0, 1]");
  }
}

}  // namespace

void validate(const TwoGroupParams& p) {
  if (!std::isfinite(p.eta) || p.eta < 0.0 || p.eta > 1.0) {
    throw Error(errc::domain_error, "eta must lie in [0, 1]");
  }
  if (!std::isfinite(p.b) || p.b < 1.0) {
    throw Error(errc::domain_error, "b must be >= 1");
  }
  if (!std::isfinite(p.gamma) || p.gamma < 1.0) {
    throw Error(errc::domain_error, "gamma must be >= 1");
  }
  if (!std::isfinite(p.base_response) || p.base_response <= 0.0 || p.base_response > 1.0) {
    throw Error(errc::domain_error, "base_response must lie in (0, 1]");
  }
  if (p.N < 1 || p.n < 1 || p.n > p.N) {
    throw Error(errc::domain_error, "need 1 <= n <= N");
  }
}

double true_rate(const TwoGroupParams& p, double rho) {
  validate(p);
  check_rho(rho);
  return p.eta * rho + (1.0 - p.eta) * rho / p.b;
}

double respondent_rate(const TwoGroupParams& p, double rho) {
  validate(p);
  check_rho(rho);
  // Bayes: weight each group by share x response rate, average its outcome rate.
  const double w1 = p.eta * p.base_response;
  const double w2 = (1.0 - p.eta) * p.base_response / p.gamma;
  return (w1 * rho + w2 * rho / p.b) / (w1 + w2);
}

double respondent_rate_closed_form(const TwoGroupParams& p, double rho) {
  validate(p);
  check_rho(rho);
  return (rho + (p.b * p.gamma - 1.0) * p.eta * rho) /
         (p.b + (p.gamma - 1.0) * p.b * p.eta);
}

double expected_bias(const TwoGroupParams& p, double rho) {
  return respondent_rate(p, rho) - true_rate(p, rho);
}

double expected_bias_factored(const TwoGroupParams& p, double rho) {
  validate(p);
  check_rho(rho);
  return (p.b - 1.0) * (p.gamma - 1.0) * (1.0 - p.eta) * p.eta /
         (p.b + (p.gamma - 1.0) * p.b * p.eta) * rho;
}

std::vector<CurvePoint> ddc_curve(const TwoGroupParams& p, std::span<const double> rho_grid) {
  validate(p);
  std::vector<CurvePoint> out;
  out.reserve(rho_grid.size());
  for (double rho : rho_grid) {
    check_rho(rho);
    CurvePoint pt;
    pt.rho = rho;
    pt.true_rate = true_rate(p, rho);
    pt.respondent_rate = respondent_rate(p, rho);
    pt.bias = pt.respondent_rate - pt.true_rate;
    const double sigma = std::sqrt(pt.true_rate * (1.0 - pt.true_rate));
    if (sigma == 0.0) {
      if (pt.bias != 0.0) {
        throw Error(errc::zero_difficulty, "nonzero bias with a degenerate true rate");
      }
      pt.ddc = 0.0;
    } else {
      decomp::DecompositionInput in;
      in.sample_mean = pt.respondent_rate;
      in.pop_mean = pt.true_rate;
      in.n = p.n;
      in.N = p.N;
      in.sigma = sigma;
      pt.ddc = decomp::ddc_estimate(in);
    }
    out.push_back(pt);
  }
  return out;
}

double slope_vs_truth(const TwoGroupParams& p) {
  validate(p);
  return (1.0 + (p.b * p.gamma - 1.0) * p.eta) /
         ((1.0 + (p.gamma - 1.0) * p.eta) * (1.0 + (p.b - 1.0) * p.eta));
}

SimResult simulate_finite(const TwoGroupParams& p, double rho, RngSeed seed) {
  validate(p);
  check_rho(rho);
  if (p.N > 10'000'000) {
    throw Error(errc::domain_error, "simulate_finite requires N <= 1e7");
  }
  CounterRng rng(seed);

  // Individuals are iid (G, V, R) with R independent of V given G, so the
  // sufficient counts factor into a chain of exact binomials.
  const std::int64_t n1 = rng.binomial(p.N, p.eta);  // group 1 size
  const std::int64_t n2 = p.N - n1;
  const std::int64_t v1 = rng.binomial(n1, rho);
  const std::int64_t v2 = rng.binomial(n2, rho / p.b);
  const double r1 = p.base_response;
  const double r2 = p.base_response / p.gamma;
  const std::int64_t resp_v1 = rng.binomial(v1, r1) + rng.binomial(v2, r2);
  const std::int64_t resp_v0 = rng.binomial(n1 - v1, r1) + rng.binomial(n2 - v2, r2);

  const std::int64_t n_v = v1 + v2;
  const std::int64_t n_r = resp_v1 + resp_v0;
  if (n_r == 0) throw Error(errc::no_respondents, "no realized respondents");

  SimResult res;
  res.respondents = n_r;
  res.population_mean = static_cast<double>(n_v) / static_cast<double>(p.N);
  res.population_sd = std::sqrt(res.population_mean * (1.0 - res.population_mean));
  res.respondent_mean = static_cast<double>(resp_v1) / static_cast<double>(n_r);
  res.empirical_bias = res.respondent_mean - res.population_mean;
  res.empirical_ddc = decomp::binary_correlation(p.N, n_v, n_r, resp_v1);
  return res;
}

}  // namespace surveydx::twogroup
