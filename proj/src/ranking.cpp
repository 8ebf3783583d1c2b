#include "surveydx/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>
#include <utility>

namespace surveydx::ranking {

namespace {

// Merge sort on a[lo, hi) counting strict inversions (a[i] > a[j], i < j).
std::uint64_t merge_count(std::vector<double>& a, std::vector<double>& buf, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t cnt = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      cnt += mid - i;
      buf[k++] = a[j++];
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return cnt;
}

// Sum of t*(t-1)/2 over runs of equal values; `sorted` must be grouped.
template <class It, class Eq>
std::int64_t tied_pairs(It first, It last, Eq eq) {
  std::int64_t total = 0;
  auto run = first;
  for (auto it = first; it != last; ++it) {
    if (!eq(*run, *it)) run = it;
    total += it - run;  // pairs (run..it-1, it)
  }
  return total;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2) {
    throw Error(errc::length_mismatch, "need two equal-length vectors with n >= 2");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) {
      throw Error(errc::non_finite, "NaN has no rank");
    }
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  const std::int64_t sn = static_cast<std::int64_t>(n);
  const std::int64_t n0 = sn * (sn - 1) / 2;
  const std::int64_t n1 =
      tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const std::int64_t n3 = tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] == x[b] && y[a] == y[b];
  });
  if (n1 == n0) throw Error(errc::all_ties, "first vector is constant");

  // y in x-order; within an x-tie block y is ascending, so inversions counted
  // below are exactly the strictly discordant pairs.
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  std::vector<double> buf(n);
  const std::uint64_t discordant = merge_count(ys, buf, 0, n);
  // ys is now fully sorted: reuse it for the y tie count.
  const std::int64_t n2 =
      tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });
  if (n2 == n0) throw Error(errc::all_ties, "second vector is constant");

  const std::int64_t s =
      n0 - n1 - n2 + n3 - 2 * static_cast<std::int64_t>(discordant);
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  return std::clamp(static_cast<double>(s) / denom, -1.0, 1.0);
}

namespace {

// (key -> aligned (label, value) pairs); insertion keeps labels ascending
// because panel entries are sorted by (geo, date).
template <class Key, class Label>
using Buckets = std::map<Key, std::vector<std::pair<Label, double>>>;

template <class Key, class Label, class Row, class MakeRow>
std::vector<Row> paired_taus(const Buckets<Key, Label>& a, const Buckets<Key, Label>& b,
                             MakeRow make_row) {
  std::vector<Row> rows;
  for (const auto& [key, va] : a) {
    const auto itb = b.find(key);
    if (itb == b.end()) continue;
    const auto& vb = itb->second;
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < va.size() && j < vb.size()) {
      if (va[i].first < vb[j].first) {
        ++i;
      } else if (vb[j].first < va[i].first) {
        ++j;
      } else {
        xs.push_back(va[i].second);
        ys.push_back(vb[j].second);
        ++i;
        ++j;
      }
    }
    if (xs.size() < 3) continue;
    double tau = 0.0;
    try {
      tau = kendall_tau(xs, ys);
    } catch (const Error& e) {
      if (e.code() != errc::all_ties) throw;
      continue;  // tau undefined on this slice
    }
    rows.push_back(make_row(key, tau, static_cast<int>(xs.size())));
  }
  if (rows.empty()) {
    throw Error(errc::no_overlap, "no slice shares >= 3 cells with a defined tau");
  }
  return rows;
}

}  // namespace

std::vector<DateTauRow> cross_sectional_tau(const core::PanelSeries& a,
                                            const core::PanelSeries& b) {
  Buckets<core::Date, std::string> ba;
  Buckets<core::Date, std::string> bb;
  for (const auto& e : a.entries) ba[e.date].emplace_back(e.geo, e.value);
  for (const auto& e : b.entries) bb[e.date].emplace_back(e.geo, e.value);
  return paired_taus<core::Date, std::string, DateTauRow>(
      ba, bb, [](const core::Date& d, double tau, int n) { return DateTauRow{d, tau, n}; });
}

std::vector<GeoTauRow> temporal_tau(const core::PanelSeries& a, const core::PanelSeries& b) {
  Buckets<std::string, core::Date> ba;
  Buckets<std::string, core::Date> bb;
  for (const auto& e : a.entries) ba[e.geo].emplace_back(e.date, e.value);
  for (const auto& e : b.entries) bb[e.geo].emplace_back(e.date, e.value);
  return paired_taus<std::string, core::Date, GeoTauRow>(
      ba, bb, [](const std::string& g, double tau, int n) { return GeoTauRow{g, tau, n}; });
}

std::vector<StateEstimate> simulate_state_estimates(std::span<const core::GeoTruth> truth,
                                                    std::int64_t national_n, CounterRng& rng) {
  core::validate_truth(truth);
  if (national_n < 1) throw Error(errc::bad_sample_size, "national_n must be >= 1");
  std::vector<double> weights;
  weights.reserve(truth.size());
  for (const auto& g : truth) weights.push_back(static_cast<double>(g.population));
  const std::vector<std::int64_t> counts = rng.multinomial(national_n, weights);

  std::vector<StateEstimate> out;
  out.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    StateEstimate e;
    e.geo = truth[i].geo;
    e.respondents = counts[i];
    if (counts[i] > 0) {
      e.estimate = static_cast<double>(rng.binomial(counts[i], truth[i].true_rate)) /
                   static_cast<double>(counts[i]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

struct RepOutcome {
  double tau = 0.0;
  bool used = false;
};

// One replication: simulate, rank against the truth (or the geo order when the
// truth is constant), mark degenerate draws unused.
RepOutcome run_replication(const RankSimConfig& config, std::span<const double> truth_ranks,
                           std::uint64_t rep) {
  CounterRng rng(derive_stream(config.seed, rep));
  const auto est = simulate_state_estimates(config.truth, config.national_n, rng);
  RepOutcome out;
  std::vector<double> xs;
  xs.reserve(est.size());
  for (const auto& e : est) {
    if (!e.estimate) return out;  // zero-respondent geo
    xs.push_back(*e.estimate);
  }
  try {
    out.tau = kendall_tau(xs, truth_ranks);
  } catch (const Error& e) {
    if (e.code() != errc::all_ties) throw;
    return out;  // all estimates tied
  }
  out.used = true;
  return out;
}

}  // namespace

TauSummary expected_tau(const RankSimConfig& config) {
  core::validate_truth(config.truth);
  if (config.truth.size() < 3) {
    throw Error(errc::domain_error, "need at least 3 geos");
  }
  if (config.national_n < 1) throw Error(errc::bad_sample_size, "national_n must be >= 1");
  if (config.replications < 1) throw Error(errc::domain_error, "need at least 1 replication");
  if (config.threads < 1) throw Error(errc::domain_error, "threads must be >= 1");

  TauSummary summary;
  summary.degenerate_truth =
      std::all_of(config.truth.begin(), config.truth.end(), [&](const core::GeoTruth& g) {
        return g.true_rate == config.truth.front().true_rate;
      });
  std::vector<double> truth_ranks;
  truth_ranks.reserve(config.truth.size());
  for (std::size_t i = 0; i < config.truth.size(); ++i) {
    truth_ranks.push_back(summary.degenerate_truth ? static_cast<double>(i)
                                                   : config.truth[i].true_rate);
  }

  const int reps = config.replications;
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
  auto worker = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      outcomes[static_cast<std::size_t>(r)] =
          run_replication(config, truth_ranks, static_cast<std::uint64_t>(r));
    }
  };
  const int threads = std::min(config.threads, reps);
  if (threads == 1) {
    worker(0, reps);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      const int lo = static_cast<int>(static_cast<std::int64_t>(reps) * t / threads);
      const int hi = static_cast<int>(static_cast<std::int64_t>(reps) * (t + 1) / threads);
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  // Reduce in replication order: results do not depend on the thread count.
  double sum = 0.0;
  int used = 0;
  for (const auto& o : outcomes) {
    if (!o.used) continue;
    sum += o.tau;
    ++used;
  }
  if (used == 0) {
    throw Error(errc::all_replications_dropped, "every replication was degenerate");
  }
  summary.mean_tau = sum / used;
  double ss = 0.0;
  for (const auto& o : outcomes) {
    if (!o.used) continue;
    const double d = o.tau - summary.mean_tau;
    ss += d * d;
  }
  summary.sd_tau = used > 1 ? std::sqrt(ss / (used - 1)) : 0.0;
  summary.replications_used = used;
  summary.dropped_replications = reps - used;
  return summary;
}

std::vector<std::int64_t> geometric_lattice(std::int64_t lo, std::int64_t hi, double ratio) {
  if (lo < 1 || hi < lo) throw Error(errc::domain_error, "need 1 <= lo <= hi");
  if (!std::isfinite(ratio) || ratio <= 1.0) {
    throw Error(errc::domain_error, "ratio must exceed 1");
  }
  std::vector<std::int64_t> out{lo};
  double x = static_cast<double>(lo);
  while (out.back() < hi) {
    x *= ratio;
    const auto next = static_cast<std::int64_t>(std::llround(x));
    out.push_back(std::min(hi, std::max(out.back() + 1, next)));
  }
  return out;
}

std::int64_t required_sample_size(std::span<const core::GeoTruth> truth, double target_tau,
                                  int replications, RngSeed seed, SearchBounds bounds,
                                  double lattice_ratio, int threads) {
  if (!std::isfinite(target_tau) || target_tau <= 0.0 || target_tau >= 1.0) {
    throw Error(errc::domain_error, "target_tau must lie in (0, 1)");
  }
  if (bounds.n_lo < 1 || bounds.n_hi < bounds.n_lo) {
    throw Error(errc::domain_error, "need 1 <= n_lo <= n_hi");
  }
  const std::vector<std::int64_t> lattice =
      geometric_lattice(bounds.n_lo, bounds.n_hi, lattice_ratio);

  // Common random numbers: the same master seed for every candidate n, so the
  // tau-vs-n curve is compared on shared draws.
  RankSimConfig config;
  config.truth.assign(truth.begin(), truth.end());
  config.replications = replications;
  config.seed = seed;
  config.threads = threads;
  std::vector<double> memo(lattice.size(), std::numeric_limits<double>::quiet_NaN());
  auto mean_at = [&](std::size_t i) {
    if (std::isnan(memo[i])) {
      config.national_n = lattice[i];
      memo[i] = expected_tau(config).mean_tau;
    }
    return memo[i];
  };

  if (mean_at(lattice.size() - 1) < target_tau) {
    throw Error(errc::target_unreachable, "upper bound does not reach the target tau");
  }
  if (mean_at(0) >= target_tau) {
    throw Error(errc::bracket_invalid, "lower bound already reaches the target tau");
  }
  std::size_t lo = 0;                  // mean < target
  std::size_t hi = lattice.size() - 1;  // mean >= target
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (mean_at(mid) >= target_tau ? hi : lo) = mid;
  }
  return lattice[hi];
}

}  // namespace surveydx::ranking
