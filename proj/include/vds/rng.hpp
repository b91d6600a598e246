#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vds {

// Counter-based 64-bit generator: output i is splitmix64's finaliser applied
// to key + i * golden_gamma. Independent streams come from derive_seed(), so
// trial t of an experiment seeded with s always draws from
// CounterRng(derive_seed(s, t)) regardless of scheduling.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return mix(key_ + (counter_++) * kGamma); }

  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  std::size_t index(std::size_t n);       // uniform on {0..n-1}, unbiased
  double normal();                        // standard normal (Box-Muller)
  double rademacher() { return ((*this)() >> 63) ? 1.0 : -1.0; }

  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Seed for stream `stream` of the experiment seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Uniformly random k-subset of {0..n-1} in ascending order.
std::vector<std::size_t> sample_without_replacement(CounterRng& rng, std::size_t n, std::size_t k);

// i.i.d. categorical draws from nonnegative weights summing to 1.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights);
  std::size_t operator()(CounterRng& rng) const;

 private:
  std::vector<double> cumulative_;
};

}  // namespace vds
