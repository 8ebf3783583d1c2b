#include "surveydx/decomposition.hpp"

#include <algorithm>
#include <cmath>

namespace surveydx::decomp {

namespace {

void check_input(const DecompositionInput& in) {
  if (in.n < 1 || in.N < 1 || in.n > in.N) {
    throw Error(errc::domain_error, "need 1 <= n <= N");
  }
  if (!std::isfinite(in.sample_mean) || !std::isfinite(in.pop_mean)) {
    throw Error(errc::non_finite, "means must be finite");
  }
  if (!std::isfinite(in.sigma) || in.sigma < 0.0) {
    throw Error(errc::domain_error, "sigma must be finite and >= 0");
  }
}

double quantity_term(std::int64_t n, std::int64_t N) {
  const double f = static_cast<double>(n) / static_cast<double>(N);
  return std::sqrt((1.0 - f) / f);
}

}  // namespace

double ddc_estimate(const DecompositionInput& in) {
  check_input(in);
  const double error = in.sample_mean - in.pop_mean;
  if (in.n == in.N) {
    if (error == 0.0) return 0.0;
    throw Error(errc::full_sample, "ddc undefined at f = 1 with nonzero error");
  }
  if (in.sigma == 0.0) {
    throw Error(errc::zero_difficulty, "ddc undefined with sigma = 0");
  }
  return error / (in.sigma * quantity_term(in.n, in.N));
}

DecompositionResult decompose_error(const DecompositionInput& in) {
  DecompositionResult out;
  out.ddc = ddc_estimate(in);  // validates
  out.error = in.sample_mean - in.pop_mean;
  out.quantity_term = in.n == in.N ? 0.0 : quantity_term(in.n, in.N);
  out.difficulty_term = in.sigma;
  out.n_eff = in.sigma > 0.0 ? effective_sample_size(out.error, in.sigma, in.N)
                             : static_cast<double>(in.N);
  out.out_of_range = std::abs(out.ddc) > 1.0;
  return out;
}

double error_from_terms(double ddc, std::int64_t n, std::int64_t N, double sigma) {
  if (n < 1 || N < 1 || n > N) throw Error(errc::domain_error, "need 1 <= n <= N");
  if (!std::isfinite(ddc) || !std::isfinite(sigma) || sigma < 0.0) {
    throw Error(errc::domain_error, "ddc and sigma must be finite, sigma >= 0");
  }
  if (n == N) return 0.0;
  return ddc * quantity_term(n, N) * sigma;
}

double effective_sample_size(double error, double sigma, std::int64_t N) {
  if (N < 1) throw Error(errc::domain_error, "need N >= 1");
  if (!std::isfinite(error)) throw Error(errc::non_finite, "error must be finite");
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw Error(errc::zero_difficulty, "effective sample size requires sigma > 0");
  }
  const double m = sigma * sigma / (error * error + sigma * sigma / static_cast<double>(N));
  return std::min(m, static_cast<double>(N));
}

double z_statistic(const DecompositionInput& in) {
  check_input(in);
  const double error = in.sample_mean - in.pop_mean;
  if (in.n == in.N) {
    if (error == 0.0) return 0.0;
    throw Error(errc::full_sample, "Z undefined at f = 1 with nonzero error");
  }
  if (in.sigma == 0.0) {
    throw Error(errc::zero_difficulty, "Z undefined with sigma = 0");
  }
  const double f = static_cast<double>(in.n) / static_cast<double>(in.N);
  return error / std::sqrt((1.0 - f) * in.sigma * in.sigma / static_cast<double>(in.n));
}

double finite_population_ddc(const FinitePopulation& pop) {
  const std::size_t n = pop.y.size();
  if (pop.r.size() != n || n < 2) {
    throw Error(errc::length_mismatch, "need matching y and r with at least 2 members");
  }
  double mean_y = 0.0;
  double mean_r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(pop.y[i])) throw Error(errc::non_finite, "non-finite y");
    mean_y += pop.y[i];
    mean_r += pop.r[i] ? 1.0 : 0.0;
  }
  mean_y /= static_cast<double>(n);
  mean_r /= static_cast<double>(n);

  double ss_y = 0.0;
  double ss_r = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = pop.y[i] - mean_y;
    const double dr = (pop.r[i] ? 1.0 : 0.0) - mean_r;
    ss_y += dy * dy;
    ss_r += dr * dr;
    cross += dy * dr;
  }
  if (ss_y == 0.0 || ss_r == 0.0) {
    throw Error(errc::degenerate_variance, "correlation undefined: y or r constant");
  }
  return cross / std::sqrt(ss_y * ss_r);
}

PopulationStats population_stats(const FinitePopulation& pop) {
  const std::size_t n = pop.y.size();
  if (pop.r.size() != n || n < 1) {
    throw Error(errc::length_mismatch, "need matching y and r");
  }
  PopulationStats s;
  for (std::size_t i = 0; i < n; ++i) {
    s.pop_mean += pop.y[i];
    if (pop.r[i]) {
      ++s.respondents;
      s.respondent_mean += pop.y[i];
    }
  }
  s.pop_mean /= static_cast<double>(n);
  if (s.respondents > 0) s.respondent_mean /= static_cast<double>(s.respondents);
  double ss = 0.0;
  for (double v : pop.y) {
    const double d = v - s.pop_mean;
    ss += d * d;
  }
  s.pop_sd = std::sqrt(ss / static_cast<double>(n));
  return s;
}

double binary_correlation(std::int64_t n_total, std::int64_t n_x, std::int64_t n_y,
                          std::int64_t n_xy) {
  if (n_total < 2 || n_x < 0 || n_x > n_total || n_y < 0 || n_y > n_total || n_xy < 0 ||
      n_xy > std::min(n_x, n_y) || n_total - n_x - n_y + n_xy < 0) {
    throw Error(errc::domain_error, "inconsistent binary counts");
  }
  const double nt = static_cast<double>(n_total);
  const double px = static_cast<double>(n_x) / nt;
  const double py = static_cast<double>(n_y) / nt;
  const double var_x = px * (1.0 - px);
  const double var_y = py * (1.0 - py);
  if (var_x == 0.0 || var_y == 0.0) {
    throw Error(errc::degenerate_variance, "correlation undefined: constant margin");
  }
  const double cov = static_cast<double>(n_xy) / nt - px * py;
  return cov / std::sqrt(var_x * var_y);
}

}  // namespace surveydx::decomp
