#include "surveydx/scenario.hpp"

#include <cmath>
#include <limits>

namespace surveydx::scenario {

namespace {

struct PopShape {
  std::int64_t N = 0;
  std::int64_t positives = 0;
  double pop_mean = 0.0;
  double sigma = 0.0;  // SD of y, 1/N convention
};

bool valid_prob(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

PopShape check_config(const ScenarioConfig& c) {
  if (c.population_size < 2) {
    throw Error(errc::domain_error, "population_size must be at least 2");
  }
  if (!valid_prob(c.true_rate)) {
    throw Error(errc::domain_error, "true_rate must lie in [0, 1]");
  }
  if (!valid_prob(c.report_one_if_positive) || !valid_prob(c.report_one_if_negative)) {
    throw Error(errc::domain_error, "report probabilities must lie in [0, 1]");
  }
  if (const auto* srs = std::get_if<SrsResponse>(&c.response)) {
    if (srs->sample_size < 1 || srs->sample_size > c.population_size) {
      throw Error(errc::bad_sample_size, "SRS sample_size must lie in [1, N]");
    }
  } else {
    const auto& g = std::get<GroupResponse>(c.response);
    if (!valid_prob(g.respond_if_positive) || !valid_prob(g.respond_if_negative)) {
      throw Error(errc::domain_error, "response probabilities must lie in [0, 1]");
    }
  }
  if (c.replications < 2) {
    throw Error(errc::domain_error, "need at least 2 replications");
  }
  PopShape s;
  s.N = c.population_size;
  s.positives = std::llround(c.true_rate * static_cast<double>(c.population_size));
  s.pop_mean = static_cast<double>(s.positives) / static_cast<double>(s.N);
  s.sigma = std::sqrt(s.pop_mean * (1.0 - s.pop_mean));
  if (s.sigma == 0.0) {
    throw Error(errc::degenerate_variance, "true rate rounds to 0 or 1: y is constant");
  }
  return s;
}

bool degenerate(double p) { return p == 0.0 || p == 1.0; }

double plugin_ddc(double sample_mean, const PopShape& s, std::int64_t respondents) {
  decomp::DecompositionInput in;
  in.sample_mean = sample_mean;
  in.pop_mean = s.pop_mean;
  in.n = respondents;
  in.N = s.N;
  in.sigma = s.sigma;
  return decomp::ddc_estimate(in);
}

// Fixed respondent set: the response rule selects exactly the positives, the
// negatives, or everyone. Estimator mean and variance follow from independent
// reporting, so nothing needs replication.
ScenarioResult closed_form_eval(const ScenarioConfig& c, const PopShape& s) {
  const auto& g = std::get<GroupResponse>(c.response);
  const std::int64_t resp_pos = g.respond_if_positive == 1.0 ? s.positives : 0;
  const std::int64_t resp_neg = g.respond_if_negative == 1.0 ? s.N - s.positives : 0;
  const std::int64_t m = resp_pos + resp_neg;
  if (m == 0) throw Error(errc::no_respondents, "response rule admits nobody");

  const double a = c.report_one_if_positive;
  const double b = c.report_one_if_negative;
  const double md = static_cast<double>(m);
  const double mean_est =
      (static_cast<double>(resp_pos) * a + static_cast<double>(resp_neg) * b) / md;
  const double var_est = (static_cast<double>(resp_pos) * a * (1.0 - a) +
                          static_cast<double>(resp_neg) * b * (1.0 - b)) /
                         (md * md);
  ScenarioResult res;
  res.mean_estimate = mean_est;
  res.mean_respondents = md;
  res.design_effect = var_est / (s.sigma * s.sigma / md);
  res.true_corr = decomp::binary_correlation(s.N, s.positives, m, resp_pos);
  res.ddc_hat = plugin_ddc(mean_est, s, m);
  res.replications_used = 0;
  res.closed_form = true;
  return res;
}

// One replication reduced to counts: respondents among positives/negatives and
// the number reporting one. Returns false if the replication is unusable
// (nobody responds, or everyone does and corr(R, Y) is undefined).
struct RepDraw {
  std::int64_t resp_pos = 0;
  std::int64_t resp_total = 0;
  std::int64_t report_one = 0;
};

bool draw_replication(const ScenarioConfig& c, const PopShape& s, CounterRng& rng,
                      RepDraw& out) {
  if (const auto* srs = std::get_if<SrsResponse>(&c.response)) {
    out.resp_total = srs->sample_size;
    out.resp_pos = rng.hypergeometric(s.N, s.positives, srs->sample_size);
  } else {
    const auto& g = std::get<GroupResponse>(c.response);
    out.resp_pos = rng.binomial(s.positives, g.respond_if_positive);
    out.resp_total = out.resp_pos + rng.binomial(s.N - s.positives, g.respond_if_negative);
  }
  if (out.resp_total == 0 || out.resp_total == s.N) return false;
  out.report_one = rng.binomial(out.resp_pos, c.report_one_if_positive) +
                   rng.binomial(out.resp_total - out.resp_pos, c.report_one_if_negative);
  return true;
}

ScenarioResult replicated_eval(const ScenarioConfig& c, const PopShape& s, RngSeed seed) {
  double sum_est = 0.0;
  double sum_sq_est = 0.0;
  double sum_corr = 0.0;
  double sum_resp = 0.0;
  int used = 0;
  for (int rep = 0; rep < c.replications; ++rep) {
    CounterRng rng(derive_stream(seed, static_cast<std::uint64_t>(rep)));
    RepDraw d;
    if (!draw_replication(c, s, rng, d)) continue;
    const double est = static_cast<double>(d.report_one) / static_cast<double>(d.resp_total);
    sum_est += est;
    sum_sq_est += est * est;
    sum_corr += decomp::binary_correlation(s.N, s.positives, d.resp_total, d.resp_pos);
    sum_resp += static_cast<double>(d.resp_total);
    ++used;
  }
  if (used < 2) {
    throw Error(errc::all_replications_dropped, "fewer than 2 usable replications");
  }
  const double ud = static_cast<double>(used);
  ScenarioResult res;
  res.mean_estimate = sum_est / ud;
  res.mean_respondents = sum_resp / ud;
  res.true_corr = sum_corr / ud;
  double var_est = (sum_sq_est - sum_est * sum_est / ud) / (ud - 1.0);
  if (var_est < 0.0) var_est = 0.0;  // cancellation guard
  const double m = res.mean_respondents;
  res.design_effect = var_est / (s.sigma * s.sigma / m);
  res.ddc_hat = plugin_ddc(res.mean_estimate, s, std::llround(m));
  res.replications_used = used;
  res.closed_form = false;
  return res;
}

}  // namespace

ScenarioConfig intimidating_config(std::int64_t population_size, std::int64_t sample_size,
                                   double true_rate) {
  ScenarioConfig c;
  c.population_size = population_size;
  c.true_rate = true_rate;
  c.response = SrsResponse{sample_size};
  c.report_one_if_positive = 1.0;
  c.report_one_if_negative = 1.0;
  return c;
}

ScenarioConfig misread_config(std::int64_t population_size, double misread_prob,
                              double true_rate) {
  if (!valid_prob(misread_prob)) {
    throw Error(errc::domain_error, "misread probability must lie in [0, 1]");
  }
  ScenarioConfig c;
  c.population_size = population_size;
  c.true_rate = true_rate;
  c.response = GroupResponse{1.0, 0.0};
  c.report_one_if_positive = 1.0 - misread_prob;
  c.report_one_if_negative = 0.0;  // unreachable: negatives never respond
  return c;
}

ScenarioResult evaluate(const ScenarioConfig& config, RngSeed seed) {
  const PopShape s = check_config(config);
  if (const auto* g = std::get_if<GroupResponse>(&config.response)) {
    if (degenerate(g->respond_if_positive) && degenerate(g->respond_if_negative)) {
      return closed_form_eval(config, s);
    }
  }
  return replicated_eval(config, s, seed);
}

decomp::FinitePopulation realize(const ScenarioConfig& config, RngSeed seed) {
  const PopShape s = check_config(config);
  CounterRng rng(seed);
  decomp::FinitePopulation pop;
  pop.y.assign(static_cast<std::size_t>(s.N), 0.0);
  pop.r.assign(static_cast<std::size_t>(s.N), 0);
  pop.y_star.assign(static_cast<std::size_t>(s.N),
                    std::numeric_limits<double>::quiet_NaN());
  for (std::int64_t i = 0; i < s.positives; ++i) pop.y[static_cast<std::size_t>(i)] = 1.0;

  if (const auto* srs = std::get_if<SrsResponse>(&config.response)) {
    // Sequential urn: include member i with probability needed / remaining.
    std::int64_t needed = srs->sample_size;
    for (std::int64_t i = 0; i < s.N && needed > 0; ++i) {
      const std::int64_t remaining = s.N - i;
      if (rng.uniform01() * static_cast<double>(remaining) < static_cast<double>(needed)) {
        pop.r[static_cast<std::size_t>(i)] = 1;
        --needed;
      }
    }
  } else {
    const auto& g = std::get<GroupResponse>(config.response);
    for (std::int64_t i = 0; i < s.N; ++i) {
      const double p = pop.y[static_cast<std::size_t>(i)] == 1.0 ? g.respond_if_positive
                                                                 : g.respond_if_negative;
      pop.r[static_cast<std::size_t>(i)] = rng.bernoulli(p) ? 1 : 0;
    }
  }
  for (std::int64_t i = 0; i < s.N; ++i) {
    if (!pop.r[static_cast<std::size_t>(i)]) continue;
    const double p = pop.y[static_cast<std::size_t>(i)] == 1.0
                         ? config.report_one_if_positive
                         : config.report_one_if_negative;
    pop.y_star[static_cast<std::size_t>(i)] = rng.bernoulli(p) ? 1.0 : 0.0;
  }
  return pop;
}

double reported_plugin_ddc(const decomp::FinitePopulation& pop) {
  const std::size_t n = pop.y.size();
  if (pop.r.size() != n || pop.y_star.size() != n || n < 2) {
    throw Error(errc::length_mismatch, "need matching y, r, y_star with at least 2 members");
  }
  const decomp::PopulationStats st = decomp::population_stats(pop);
  if (st.respondents == 0) throw Error(errc::no_respondents, "no respondents");
  double reported = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pop.r[i]) continue;
    if (!std::isfinite(pop.y_star[i])) {
      throw Error(errc::non_finite, "respondent without a finite reported value");
    }
    reported += pop.y_star[i];
  }
  reported /= static_cast<double>(st.respondents);
  decomp::DecompositionInput in;
  in.sample_mean = reported;
  in.pop_mean = st.pop_mean;
  in.n = st.respondents;
  in.N = static_cast<std::int64_t>(n);
  in.sigma = st.pop_sd;
  return decomp::ddc_estimate(in);
}

ScenarioResult scenario_metrics(const decomp::FinitePopulation& pop,
                                double estimator_variance) {
  if (!std::isfinite(estimator_variance) || estimator_variance < 0.0) {
    throw Error(errc::domain_error, "estimator variance must be finite and >= 0");
  }
  const decomp::PopulationStats st = decomp::population_stats(pop);
  if (st.respondents == 0) throw Error(errc::no_respondents, "no respondents");
  if (st.pop_sd == 0.0) {
    throw Error(errc::degenerate_variance, "y is constant");
  }
  ScenarioResult res;
  res.ddc_hat = reported_plugin_ddc(pop);
  res.true_corr = decomp::finite_population_ddc(pop);
  const double m = static_cast<double>(st.respondents);
  res.design_effect = estimator_variance / (st.pop_sd * st.pop_sd / m);
  double reported = 0.0;
  for (std::size_t i = 0; i < pop.y.size(); ++i) {
    if (pop.r[i]) reported += pop.y_star[i];
  }
  res.mean_estimate = reported / m;
  res.mean_respondents = m;
  res.replications_used = 0;
  res.closed_form = false;
  return res;
}

}  // namespace surveydx::scenario
