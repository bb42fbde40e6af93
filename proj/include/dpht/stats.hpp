#pragma once

#include <span>
#include <string>
#include <vector>

#include "dpht/tables.hpp"

namespace dpht {

enum class StatisticKind { Chi2, LR, LRModified, LL, Diff };

std::string statistic_name(StatisticKind kind);
StatisticKind parse_statistic(const std::string& name);

/// Values and expected counts at or below this are clamped before any log or
/// division. Exactly-zero values contribute 0 to x log x terms.
inline constexpr double kClampDelta = 1e-9;

/// "Several" noise standard deviations in the small-count rule of thumb.
inline constexpr double kRuleOfThumbSigmas = 3.0;

struct StatOptions {
  double clamp_delta = kClampDelta;
  /// Noise standard deviation of the input; drives low_count_warning.
  double noise_sd = 0.0;
};

struct StatValue {
  double value = 0.0;
  bool clamped = false;
  bool low_count_warning = false;
};

/// Independence statistics also return the expected counts used.
struct IndependenceStat {
  StatValue stat;
  RealTable expected;
};

/// True iff some cell is below 5 + 3 * noise_sd.
bool low_count_warning(std::span<const double> values, double noise_sd);

StatValue chi2_gof(std::span<const double> values, std::span<const double> theta, double n, const StatOptions& opts = {});

/// Noise-aware GOF likelihood ratio, 2 sum [x log(x/e) - x + e] with e = n theta.
StatValue lr_gof(std::span<const double> values, std::span<const double> theta, double n, const StatOptions& opts = {});

/// E[i,j] = T[i,.] T[.,j] / T[.,.] from the same (possibly noisy) table.
RealTable expected_independence(const RealTable& t);

IndependenceStat chi2_independence(const RealTable& t, const StatOptions& opts = {});
IndependenceStat lr_independence(const RealTable& t, const StatOptions& opts = {});

/// 2 sum [v log(v/E) - (v - E)].
StatValue lr_modified(std::span<const double> values, std::span<const double> expected, const StatOptions& opts = {});

/// Pooled expected counts E1 = n1 (T+S)/(n1+n2), E2 = n2 (T+S)/(n1+n2).
struct PooledExpected {
  std::vector<double> e1;
  std::vector<double> e2;
};
PooledExpected expected_proportions(std::span<const double> tv, std::span<const double> sv, double n1, double n2);

StatValue chi2_proportions(std::span<const double> tv, std::span<const double> sv, double n1, double n2,
                           const StatOptions& opts = {});
StatValue lr_proportions(std::span<const double> tv, std::span<const double> sv, double n1, double n2,
                         const StatOptions& opts = {});

/// Negative log of the margins-conditional table probability, via lgamma.
double ll_statistic(const CountTable& t);

/// LL on noisy values: round to nearest integer, clamp at 0, recompute margins.
/// The returned flag `clamped` records that rounding happened.
StatValue ll_statistic_noisy(const RealTable& t);

/// sum |T[i,j] - T[i,.] T[.,j] / n|.
double diff_statistic(const RealTable& t);

/// Chi-squared survival function P(X_df >= stat).
double classical_pvalue_chi2(double stat, int df);

/// Degrees of freedom: r - 1 for GOF/proportions, (r-1)(c-1) for independence.
int df_gof(std::size_t cells);
int df_independence(std::size_t rows, std::size_t cols);

/// x log x with 0 log 0 = 0.
double xlogx(double x);

}  // namespace dpht
