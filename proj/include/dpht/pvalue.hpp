#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpht/noise.hpp"
#include "dpht/nullsim.hpp"
#include "dpht/stats.hpp"

namespace dpht {

inline constexpr std::size_t kDefaultReferenceCount = 10000;

/// A test on privatized data. Inputs are NoisyTables only: the request has no
/// way to carry exact counts, so every p-value is post-processing of the release.
struct TestRequest {
  TestKind test = TestKind::Independence;
  StatisticKind statistic = StatisticKind::Chi2;
  /// One table (GOF, independence) or two (proportions).
  std::vector<NoisyTable> tables;
  /// Prespecified null for GOF.
  std::optional<Theta> theta0;
  std::size_t m = kDefaultReferenceCount;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Report (exceed + 1) / (m + 1) instead of exceed / m.
  bool smoothing = false;
  double clamp_delta = kClampDelta;
  GofMethod gof_method = GofMethod::ExactMultinomial;
};

struct TestResult {
  TestKind test = TestKind::Independence;
  StatisticKind statistic = StatisticKind::Chi2;
  double t_star = 0.0;
  std::size_t m = 0;
  std::size_t exceed = 0;
  double p_value = 1.0;
  std::vector<std::string> flags;
  std::uint64_t seed = 0;
  /// Noise provenance of each input table.
  std::vector<Provenance> inputs;

  bool has_flag(const std::string& flag) const;
};

using ReferenceSampler = std::function<double(Stream&)>;

/// Reference draw l uses Stream(derive_seed(seed, "reference"), l), so the
/// count is identical for any thread count. Ties (t_l == t_star) count as
/// exceedances.
TestResult monte_carlo_pvalue(double t_star, const ReferenceSampler& sampler, std::size_t m, std::uint64_t seed,
                              unsigned threads = 1, bool smoothing = false);

/// Computes t* from the noisy inputs, builds the matching null sampler from
/// the noisy tables, declared sizes and recorded noise, and counts exceedances.
TestResult run_test(const TestRequest& req);

/// Observed statistic of the request's noisy inputs (step 1 of run_test).
StatValue observed_statistic(const TestRequest& req);

/// Sampler configuration run_test would use for this request.
NullSamplerConfig null_config(const TestRequest& req, bool* theta_repaired = nullptr);

/// Baseline that treats noisy tables as exact: classical chi-squared(df)
/// p-value of the noisy statistic.
double naive_js_pvalue(const TestRequest& req);
double naive_js_pvalue(const NoisyTable& nt, TestKind test, StatisticKind stat,
                       const std::optional<Theta>& theta0 = std::nullopt);

/// Degrees of freedom of the classical reference for a request.
int classical_df(const TestRequest& req);

}  // namespace dpht
