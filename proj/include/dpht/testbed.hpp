#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpht/noise.hpp"
#include "dpht/pvalue.hpp"
#include "dpht/rng.hpp"
#include "dpht/stats.hpp"
#include "dpht/tables.hpp"

namespace dpht {

/// Builds margins from row and column sums; throws unless both are
/// nonnegative, nonempty and have the same total.
Margins make_margins(std::vector<std::int64_t> row_sums, std::vector<std::int64_t> col_sums);

/// Parses "r1,r2,...;c1,c2,..." or "r1,r2/c1,c2".
Margins parse_margins(const std::string& text);

/// One table from the permutation null: n row labels drawn from an urn
/// without replacement, paired with the column labels in order.
CountTable permutation_null_sample(const Margins& mg, Stream& rng);

enum class PerturbMode { Input, Output };

std::string mode_name(PerturbMode mode);
PerturbMode parse_mode(const std::string& name);

/// Per-cell Laplace(4/epsilon). epsilon == inf returns the exact table.
NoisyTable mn_input_perturb(const CountTable& t, double epsilon, Stream& rng, std::uint64_t seed_for_record = 0);

/// stat_value + Laplace(s_h/epsilon).
double mn_output_perturb(double stat_value, double s_h, double epsilon, Stream& rng);

struct SensitivityReport {
  StatisticKind statistic = StatisticKind::Chi2;
  Margins margins;
  double s_h = 0.0;
  /// Which closed form (or fallback) produced s_h.
  std::string branch;
  std::optional<double> brute_force;
  /// "unit_margin": a margin equals 1, where the r x c closed forms can
  /// exceed the true maximum. "zero_margin": empty rows/columns were dropped.
  /// "brute_force_fallback": no closed form exists for the shape.
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

inline constexpr double kDiffSensitivity = 4.0;
inline constexpr std::size_t kBruteForceTableCap = 1000000;

/// Closed-form s_h. With brute_force set, the oracle value is attached too.
SensitivityReport sensitivity(StatisticKind stat, const Margins& mg, bool with_brute_force = false);

/// Max |h(T) - h(T')| over all tables T with margins mg and every single
/// +-1 quadruple swap T'. Throws TooLarge past `cap` tables.
double brute_force_sensitivity(StatisticKind stat, const Margins& mg, std::size_t cap = kBruteForceTableCap);

/// Number of tables with the given margins, stopping once `cap` is passed.
std::size_t count_tables(const Margins& mg, std::size_t cap = kBruteForceTableCap);

/// Statistic on an exact table with fixed margins (output perturbation path).
double testbed_statistic(StatisticKind stat, const CountTable& t);

/// Statistic on a noisy table with noisy margins (input perturbation path).
double testbed_statistic(StatisticKind stat, const RealTable& t);

struct TestbedRequest {
  StatisticKind statistic = StatisticKind::Chi2;
  PerturbMode mode = PerturbMode::Input;
  double epsilon = kInfinity;
  std::size_t m = kDefaultReferenceCount;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Permutation-null p-value under marginal-neighbor privacy. Reference tables
/// whose noisy margins are degenerate count as exceedances and are flagged.
TestResult testbed_pvalue(const CountTable& t, const TestbedRequest& req);
TestResult testbed_pvalue(const CountTable& t, StatisticKind stat, PerturbMode mode, double epsilon, std::size_t m,
                          std::uint64_t seed, unsigned threads = 1);

}  // namespace dpht
