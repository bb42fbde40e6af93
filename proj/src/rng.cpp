#include "dpht/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dpht/error.hpp"

namespace dpht {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64_next(s);
}

// Stirling series tail log(k!) - [(k + 1/2) log(k + 1) - (k + 1) + log(2 pi)/2].
double stirling_tail(double k) {
  static constexpr double kTable[10] = {
      0.08106146679532726, 0.04134069595540929, 0.02767792568499834, 0.02079067210376509,
      0.01664469118982119, 0.01387612882307075, 0.01189670994589177, 0.01041126526197209,
      0.009255462182712733, 0.008330563433362871};
  if (k <= 9.0) return kTable[static_cast<int>(k)];
  const double kp1 = k + 1.0;
  const double inv2 = 1.0 / (kp1 * kp1);
  return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 * inv2) * inv2) / kp1;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix(mix(seed) ^ (tag * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  // FNV-1a of the label, then the integer derivation.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return derive_seed(seed, h);
}

Stream::Stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t sm = derive_seed(seed, index);
  for (auto& word : state_) word = splitmix64_next(sm);
}

std::uint64_t Stream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Stream::uniform() {
  // 53 random bits, offset by half an ulp so 0 and 1 are never returned.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

__extension__ typedef unsigned __int128 uint128;

std::uint64_t Stream::below(std::uint64_t bound) {
  // Lemire's nearly-divisionless method.
  uint128 m = static_cast<uint128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<uint128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Stream::laplace(double scale) {
  if (scale == 0.0) return 0.0;
  const double u = uniform() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::fabs(u));
  return u < 0 ? -magnitude : magnitude;
}

std::int64_t Stream::binomial(std::int64_t n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::SamplerFailure, "binomial parameters out of range");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - binomial(n, 1.0 - p);
  if (static_cast<double>(n) * p <= 30.0) return binomial_inversion(n, p);
  return binomial_btrd(n, p);
}

std::int64_t Stream::binomial_inversion(std::int64_t n, double p) {
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = static_cast<double>(n + 1) * s;
  const double r0 = std::exp(static_cast<double>(n) * std::log1p(-p));
  // n * p <= 30 keeps the mass within a few hundred steps of zero; restart if
  // round-off carries the search past the support.
  const std::int64_t limit = std::min<std::int64_t>(n, 400);
  while (true) {
    double u = uniform();
    double r = r0;
    std::int64_t x = 0;
    while (u > r) {
      u -= r;
      ++x;
      if (x > limit) break;
      r *= a / static_cast<double>(x) - s;
    }
    if (x <= limit) return x;
  }
}

// Hormann (1993), "The generation of binomial random variates", algorithm BTRD.
std::int64_t Stream::binomial_btrd(std::int64_t n_int, double p) {
  const double n = static_cast<double>(n_int);
  const double q = 1.0 - p;
  const double m = std::floor((n + 1.0) * p);
  const double r = p / q;
  const double nr = (n + 1.0) * r;
  const double npq = n * p * q;
  const double spq = std::sqrt(npq);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = n * p + 0.5;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double v_r = 0.92 - 4.2 / b;
  const double u_rv_r = 0.86 * v_r;

  while (true) {
    double v = uniform();
    double u;
    if (v <= u_rv_r) {
      u = v / v_r - 0.43;
      return static_cast<std::int64_t>(std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + c));
    }
    if (v >= v_r) {
      u = uniform() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = std::copysign(0.5, u) - u;
      v = v_r * uniform();
    }
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + c);
    if (k < 0.0 || k > n) continue;
    v = v * alpha / (a / (us * us) + b);
    const double km = std::fabs(k - m);
    if (km <= 15.0) {
      double f = 1.0;
      if (m < k) {
        for (double i = m + 1.0; i <= k; i += 1.0) f *= nr / i - r;
      } else if (m > k) {
        for (double i = k + 1.0; i <= m; i += 1.0) v *= nr / i - r;
      }
      if (v <= f) return static_cast<std::int64_t>(k);
      continue;
    }
    v = std::log(v);
    const double rho = (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6.0) / npq + 0.5);
    const double t = -km * km / (2.0 * npq);
    if (v < t - rho) return static_cast<std::int64_t>(k);
    if (v > t + rho) continue;
    const double nm = n - m + 1.0;
    const double h = (m + 0.5) * std::log((m + 1.0) / (r * nm)) + stirling_tail(m) + stirling_tail(n - m);
    const double nk = n - k + 1.0;
    if (v <= h + (n + 1.0) * std::log(nm / nk) + (k + 0.5) * std::log(nk * r / (k + 1.0)) - stirling_tail(k) -
                 stirling_tail(n - k)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

void Stream::multinomial(std::int64_t n, std::span<const double> probs, std::span<std::int64_t> out) {
  if (probs.size() != out.size() || probs.empty()) {
    throw Error(ErrorCode::SamplerFailure, "multinomial: size mismatch");
  }
  double remaining_mass = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw Error(ErrorCode::SamplerFailure, "multinomial: negative probability");
    remaining_mass += p;
  }
  if (!(remaining_mass > 0.0)) throw Error(ErrorCode::SamplerFailure, "multinomial: zero total mass");

  std::int64_t left = n;
  const std::size_t last = probs.size() - 1;
  for (std::size_t i = 0; i < last; ++i) {
    if (left == 0 || probs[i] == 0.0) {
      out[i] = 0;
    } else {
      const double cond = std::min(1.0, probs[i] / remaining_mass);
      out[i] = binomial(left, cond);
      left -= out[i];
    }
    remaining_mass -= probs[i];
    if (remaining_mass <= 0.0) {
      // round-off exhausted the mass; remaining categories get nothing
      for (std::size_t j = i + 1; j < last; ++j) out[j] = 0;
      out[last] = left;
      return;
    }
  }
  out[last] = left;
}

}  // namespace dpht
