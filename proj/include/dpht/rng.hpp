#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace dpht {

/// SplitMix64 output function; also used as a 64-bit mixer for seed derivation.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed from (seed, tag). Used to give every
/// trial, repetition and reference draw its own stream so results never
/// depend on evaluation order or thread count.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Portable random stream: xoshiro256** seeded through SplitMix64 from a
/// (seed, index) pair. Every variate is produced by code in this file, never
/// by <random> distributions, so sequences are identical across standard
/// libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t index = 0);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (the second variate is cached).
  double normal();

  /// Laplace(0, scale) via inverse CDF; scale == 0 returns 0.
  double laplace(double scale);

  /// Binomial(n, p). Inversion when min(p, 1-p) * n <= 30, BTRD otherwise.
  std::int64_t binomial(std::int64_t n, double p);

  /// Multinomial(n, probs) by sequential conditional binomials. probs need
  /// not be normalised but must be nonnegative with a positive sum.
  void multinomial(std::int64_t n, std::span<const double> probs, std::span<std::int64_t> out);

  /// Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::int64_t binomial_inversion(std::int64_t n, double p);
  std::int64_t binomial_btrd(std::int64_t n, double p);

  std::array<std::uint64_t, 4> state_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dpht
