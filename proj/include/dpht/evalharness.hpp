#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpht/noise.hpp"
#include "dpht/nullsim.hpp"
#include "dpht/pvalue.hpp"
#include "dpht/stats.hpp"
#include "dpht/tables.hpp"

namespace dpht {

enum class PValueMethod { Ours, NaiveJS };

std::string method_name(PValueMethod method);
PValueMethod parse_method(const std::string& name);

inline constexpr std::size_t kDefaultTrials = 2000;

struct ReliabilityConfig {
  TestKind test = TestKind::Independence;
  StatisticKind statistic = StatisticKind::Chi2;
  /// Table size for independence and GOF.
  std::int64_t n0 = 1000;
  /// Sample sizes for proportions.
  std::int64_t n1 = 1000;
  std::int64_t n2 = 1000;
  /// Null cell probabilities P_row[i] P_col[j] (independence).
  std::vector<double> p_row = {0.5, 0.5};
  std::vector<double> p_col = {0.5, 0.5};
  /// Null theta (GOF, proportions).
  std::vector<double> theta;
  std::vector<double> epsilons = {0.2};
  std::size_t trials = kDefaultTrials;
  std::size_t m = 1000;
  std::uint64_t seed = 0;
  PValueMethod method = PValueMethod::Ours;
  double sensitivity = kTableSensitivity;
  unsigned threads = 1;
  /// Keep every k-th point of the sorted series for plotting (0 or 1 keeps all).
  std::size_t thin = 0;
};

void validate_reliability(const ReliabilityConfig& cfg);

struct QQPoint {
  /// Index of the trial that produced this p-value.
  std::size_t trial = 0;
  double p_value = 0.0;
  /// i / (n + 1) for the i-th smallest p-value.
  double uniform_quantile = 0.0;
};

struct QQSeries {
  double epsilon = kInfinity;
  PValueMethod method = PValueMethod::Ours;
  /// Sorted by p_value, ascending.
  std::vector<QQPoint> points;
  double ks = 0.0;
  /// Fraction of p-values <= 0.05.
  double rejection_rate_05 = 0.0;
  /// Trials dropped because the noisy table was degenerate.
  std::size_t skipped = 0;
};

/// One-sample KS distance between the empirical CDF and Uniform(0,1).
double ks_uniform(std::vector<double> pvalues);

/// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// KS distance of a sample against an arbitrary continuous CDF.
template <typename Cdf>
double ks_against(std::vector<double> sample, Cdf cdf);

/// Draws the exact null table(s) of one trial.
std::vector<CountTable> sample_null_tables(const ReliabilityConfig& cfg, Stream& rng);

QQSeries reliability_series(const ReliabilityConfig& cfg, double epsilon);
std::vector<QQSeries> reliability_experiment(const ReliabilityConfig& cfg);

struct AgreementConfig {
  TestKind test = TestKind::Independence;
  /// One table (independence, GOF) or two (proportions).
  std::vector<CountTable> tables;
  std::optional<Theta> theta0;
  std::vector<StatisticKind> statistics = {StatisticKind::Chi2, StatisticKind::LR};
  std::vector<double> epsilons;
  std::size_t repeats = 100;
  std::size_t m = kDefaultReferenceCount;
  std::uint64_t seed = 0;
  double sensitivity = kTableSensitivity;
  unsigned threads = 1;
};

struct AgreementRow {
  double epsilon = kInfinity;
  StatisticKind statistic = StatisticKind::Chi2;
  double mean_p = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  /// Monte Carlo p-value of the exact table(s) with the same reference seed.
  double nonprivate_p = 0.0;
  std::size_t repeats_used = 0;
  std::size_t skipped = 0;
};

/// Mean and 10th/90th percentile of private p-values per (epsilon, statistic).
/// All repetitions and the non-private run share one reference seed, so at
/// epsilon = inf the private and non-private p-values coincide exactly.
std::vector<AgreementRow> agreement_experiment(const AgreementConfig& cfg);

/// Linear-interpolation quantile of a sorted sample.
double sample_quantile(const std::vector<double>& sorted, double q);

/// "election" or "nyc_taxi".
CountTable builtin_fixture(const std::string& name);
std::vector<std::string> builtin_fixture_names();

void write_qq_csv(std::ostream& os, const std::vector<QQSeries>& series, std::size_t thin = 0);
void write_agreement_csv(std::ostream& os, const std::vector<AgreementRow>& rows);

template <typename Cdf>
double ks_against(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace dpht
