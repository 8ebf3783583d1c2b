#ifndef SURVEYDX_RNG_HPP
#define SURVEYDX_RNG_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace surveydx {

// Seed for the library's deterministic generator. Identical seed and identical
// configuration give bit-identical simulation output on the same build.
struct RngSeed {
  std::uint64_t value = 0;
};

// splitmix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent child seed for a numbered stream (replication,
// worker, ...). Aggregation over streams is order-independent because each
// stream is a pure function of (master, stream).
constexpr RngSeed derive_stream(RngSeed master, std::uint64_t stream) {
  return RngSeed{mix64(master.value + 0x9E3779B97F4A7C15ull * (stream + 1))};
}

// Counter-style generator: output i is mix64(seed + (i+1)*golden). All
// stochastic operations in the library draw from this generator and take an
// explicit seed; no global RNG state exists.
class CounterRng {
 public:
  // Generator identity, recorded in output metadata.
  static constexpr const char* kName = "splitmix64-counter/v1";

  explicit CounterRng(RngSeed seed) : state_(seed.value) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Exact Binomial(n, p) draw by geometric gap skipping; expected cost
  // O(n * min(p, 1-p)).
  std::int64_t binomial(std::int64_t n, double p);

  // Exact Hypergeometric draw (successes among `draws` taken without
  // replacement from a population with `successes` marked) via sequential
  // urn updates; O(draws).
  std::int64_t hypergeometric(std::int64_t population, std::int64_t successes,
                              std::int64_t draws);

  // Single multinomial draw of n items over the given nonnegative weights,
  // via the conditional-binomial factorization. Counts sum to n exactly.
  std::vector<std::int64_t> multinomial(std::int64_t n, std::span<const double> weights);

 private:
  std::uint64_t state_;
};

}  // namespace surveydx

#endif  // SURVEYDX_RNG_HPP
