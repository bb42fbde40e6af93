#include "dpht/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "dpht/error.hpp"

namespace dpht {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": length mismatch");
  }
}

// One likelihood-ratio term v log(v / e). Negative or tiny v is clamped to the
// x log x limit (contributes 0); e is clamped at delta.
double lr_term(double v, double e, double delta, bool& clamped) {
  if (e <= delta) {
    e = delta;
    clamped = true;
  }
  if (v <= 0.0) {
    if (v < 0.0) clamped = true;
    return 0.0;
  }
  return v * std::log(v / e);
}

double clamp_expected(double e, double delta, bool& clamped) {
  if (e <= delta) {
    clamped = true;
    return delta;
  }
  return e;
}

void check_theta_positive(std::span<const double> theta) {
  for (double t : theta) {
    if (!(t > 0.0)) throw Error(ErrorCode::ZeroThetaCell, "theta has a zero cell");
  }
}

void check_margins(const RealTable& t) {
  if (t.rows < 2 || t.cols < 2) {
    throw Error(ErrorCode::InvalidArgument, "independence statistics need at least a 2x2 table");
  }
  if (!(t.total() > 0.0)) throw Error(ErrorCode::DegenerateMargins, "grand total <= 0");
  for (double s : t.row_sums()) {
    if (!(s > 0.0)) throw Error(ErrorCode::DegenerateMargins, "a row sum is <= 0");
  }
  for (double s : t.col_sums()) {
    if (!(s > 0.0)) throw Error(ErrorCode::DegenerateMargins, "a column sum is <= 0");
  }
}

}  // namespace

std::string statistic_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Chi2: return "chi2";
    case StatisticKind::LR: return "lr";
    case StatisticKind::LRModified: return "lr_modified";
    case StatisticKind::LL: return "ll";
    case StatisticKind::Diff: return "diff";
  }
  return "unknown";
}

StatisticKind parse_statistic(const std::string& name) {
  if (name == "chi2") return StatisticKind::Chi2;
  if (name == "lr") return StatisticKind::LR;
  if (name == "lr_modified") return StatisticKind::LRModified;
  if (name == "ll") return StatisticKind::LL;
  if (name == "diff") return StatisticKind::Diff;
  throw Error(ErrorCode::InvalidArgument, "unknown statistic '" + name + "'");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

bool low_count_warning(std::span<const double> values, double noise_sd) {
  const double threshold = 5.0 + kRuleOfThumbSigmas * noise_sd;
  for (double v : values) {
    if (v < threshold) return true;
  }
  return false;
}

StatValue chi2_gof(std::span<const double> values, std::span<const double> theta, double n, const StatOptions& opts) {
  require_same_length(values, theta, "chi2_gof");
  check_theta_positive(theta);
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "chi2_gof: n must be > 0");
  StatValue out;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double e = n * theta[j];
    const double d = values[j] - e;
    out.value += d * d / e;
  }
  out.low_count_warning = low_count_warning(values, opts.noise_sd);
  return out;
}

StatValue lr_gof(std::span<const double> values, std::span<const double> theta, double n, const StatOptions& opts) {
  require_same_length(values, theta, "lr_gof");
  check_theta_positive(theta);
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "lr_gof: n must be > 0");
  StatValue out;
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double e = n * theta[j];
    const double v = values[j] > 0.0 ? values[j] : 0.0;
    if (values[j] < 0.0) out.clamped = true;
    sum += lr_term(v, e, opts.clamp_delta, out.clamped) - v + e;
  }
  out.value = 2.0 * sum;
  out.low_count_warning = low_count_warning(values, opts.noise_sd);
  return out;
}

RealTable expected_independence(const RealTable& t) {
  const auto rs = t.row_sums();
  const auto cs = t.col_sums();
  const double total = t.total();
  RealTable e{t.rows, t.cols, std::vector<double>(t.values.size())};
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) e.at(i, j) = rs[i] * cs[j] / total;
  return e;
}

IndependenceStat chi2_independence(const RealTable& t, const StatOptions& opts) {
  check_margins(t);
  IndependenceStat out{{}, expected_independence(t)};
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    const double e = clamp_expected(out.expected.values[k], opts.clamp_delta, out.stat.clamped);
    const double d = t.values[k] - e;
    out.stat.value += d * d / e;
  }
  out.stat.low_count_warning = low_count_warning(t.values, opts.noise_sd);
  return out;
}

IndependenceStat lr_independence(const RealTable& t, const StatOptions& opts) {
  check_margins(t);
  IndependenceStat out{{}, expected_independence(t)};
  double sum = 0.0;
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    sum += lr_term(t.values[k], out.expected.values[k], opts.clamp_delta, out.stat.clamped);
  }
  out.stat.value = 2.0 * sum;
  out.stat.low_count_warning = low_count_warning(t.values, opts.noise_sd);
  return out;
}

StatValue lr_modified(std::span<const double> values, std::span<const double> expected, const StatOptions& opts) {
  require_same_length(values, expected, "lr_modified");
  for (double e : expected) {
    if (!(e > 0.0)) throw Error(ErrorCode::ZeroExpectedCell, "expected count <= 0");
  }
  StatValue out;
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sum += lr_term(values[k], expected[k], opts.clamp_delta, out.clamped) - (values[k] - expected[k]);
  }
  out.value = 2.0 * sum;
  out.low_count_warning = low_count_warning(values, opts.noise_sd);
  return out;
}

PooledExpected expected_proportions(std::span<const double> tv, std::span<const double> sv, double n1, double n2) {
  require_same_length(tv, sv, "proportions");
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "proportions: n1, n2 must be > 0");
  PooledExpected out{std::vector<double>(tv.size()), std::vector<double>(tv.size())};
  for (std::size_t k = 0; k < tv.size(); ++k) {
    const double pooled = tv[k] + sv[k];
    if (!(pooled > 0.0)) throw Error(ErrorCode::DegeneratePooledCell, "pooled cell <= 0");
    out.e1[k] = n1 * pooled / (n1 + n2);
    out.e2[k] = n2 * pooled / (n1 + n2);
  }
  return out;
}

StatValue chi2_proportions(std::span<const double> tv, std::span<const double> sv, double n1, double n2,
                           const StatOptions& opts) {
  const auto e = expected_proportions(tv, sv, n1, n2);
  StatValue out;
  for (std::size_t k = 0; k < tv.size(); ++k) {
    const double e1 = clamp_expected(e.e1[k], opts.clamp_delta, out.clamped);
    const double e2 = clamp_expected(e.e2[k], opts.clamp_delta, out.clamped);
    out.value += (tv[k] - e1) * (tv[k] - e1) / e1 + (sv[k] - e2) * (sv[k] - e2) / e2;
  }
  out.low_count_warning = low_count_warning(tv, opts.noise_sd) || low_count_warning(sv, opts.noise_sd);
  return out;
}

StatValue lr_proportions(std::span<const double> tv, std::span<const double> sv, double n1, double n2,
                         const StatOptions& opts) {
  const auto e = expected_proportions(tv, sv, n1, n2);
  StatValue out;
  double sum = 0.0;
  for (std::size_t k = 0; k < tv.size(); ++k) {
    sum += lr_term(tv[k], e.e1[k], opts.clamp_delta, out.clamped);
    sum += lr_term(sv[k], e.e2[k], opts.clamp_delta, out.clamped);
  }
  out.value = 2.0 * sum;
  out.low_count_warning = low_count_warning(tv, opts.noise_sd) || low_count_warning(sv, opts.noise_sd);
  return out;
}

double ll_statistic(const CountTable& t) {
  const auto lfact = [](std::int64_t k) { return std::lgamma(static_cast<double>(k) + 1.0); };
  double s = 0.0;
  for (auto r : t.row_sums()) s += lfact(r);
  for (auto c : t.col_sums()) s += lfact(c);
  s -= lfact(t.total());
  for (auto v : t.counts()) s -= lfact(v);
  return -s;
}

StatValue ll_statistic_noisy(const RealTable& t) {
  std::vector<std::int64_t> rounded(t.values.size());
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    rounded[k] = std::max<std::int64_t>(0, std::llround(t.values[k]));
  }
  StatValue out;
  out.value = ll_statistic(CountTable(t.rows, t.cols, std::move(rounded)));
  out.clamped = true;
  return out;
}

double diff_statistic(const RealTable& t) {
  const double total = t.total();
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateTotal, "diff statistic needs a positive total");
  const auto e = expected_independence(t);
  double s = 0.0;
  for (std::size_t k = 0; k < t.values.size(); ++k) s += std::fabs(t.values[k] - e.values[k]);
  return s;
}

double classical_pvalue_chi2(double stat, int df) {
  if (df <= 0) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(stat)) throw Error(ErrorCode::InvalidArgument, "statistic is NaN");
  if (stat <= 0.0) return 1.0;
  if (std::isinf(stat)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

int df_gof(std::size_t cells) { return static_cast<int>(cells) - 1; }

int df_independence(std::size_t rows, std::size_t cols) {
  return static_cast<int>((rows - 1) * (cols - 1));
}

}  // namespace dpht
