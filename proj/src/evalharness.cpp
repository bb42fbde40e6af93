#include "dpht/evalharness.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "dpht/error.hpp"
#include "dpht/parallel.hpp"

namespace dpht {

namespace {

bool is_degenerate(const Error& e) {
  switch (e.code()) {
    case ErrorCode::DegenerateMargins:
    case ErrorCode::DegenerateTotal:
    case ErrorCode::DegeneratePooledCell:
    case ErrorCode::ZeroExpectedCell:
    case ErrorCode::ZeroThetaCell:
      return true;
    default:
      return false;
  }
}

std::vector<double> outer(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() * b.size());
  for (double x : a)
    for (double y : b) out.push_back(x * y);
  return out;
}

CountTable draw_table(std::size_t rows, std::size_t cols, std::int64_t n, const std::vector<double>& p, Stream& rng) {
  std::vector<std::int64_t> cells(p.size());
  rng.multinomial(n, p, cells);
  return CountTable(rows, cols, std::move(cells));
}

TestRequest make_request(TestKind test, StatisticKind stat, std::vector<NoisyTable> tables,
                         const std::optional<Theta>& theta0, std::size_t m, std::uint64_t seed) {
  TestRequest req;
  req.test = test;
  req.statistic = stat;
  req.tables = std::move(tables);
  req.theta0 = theta0;
  req.m = m;
  req.seed = seed;
  req.threads = 1;
  return req;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // shortest representation that round-trips
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string method_name(PValueMethod method) { return method == PValueMethod::Ours ? "ours" : "naive_js"; }

PValueMethod parse_method(const std::string& name) {
  if (name == "ours") return PValueMethod::Ours;
  if (name == "naive_js" || name == "naive-js" || name == "js") return PValueMethod::NaiveJS;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

void validate_reliability(const ReliabilityConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (cfg.m < 1) throw Error(ErrorCode::InvalidArgument, "m must be >= 1");
  if (cfg.epsilons.empty()) throw Error(ErrorCode::InvalidArgument, "at least one epsilon is required");
  for (double e : cfg.epsilons)
    if (!(e > 0.0)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be > 0");
  switch (cfg.test) {
    case TestKind::Independence:
      validate_theta(Theta::vector(cfg.p_row));
      validate_theta(Theta::vector(cfg.p_col));
      if (cfg.p_row.size() < 2 || cfg.p_col.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "independence needs at least a 2x2 table");
      }
      if (cfg.n0 < 1) throw Error(ErrorCode::InvalidArgument, "n0 must be >= 1");
      break;
    case TestKind::GoodnessOfFit:
      validate_theta(Theta::vector(cfg.theta));
      if (cfg.n0 < 1) throw Error(ErrorCode::InvalidArgument, "n0 must be >= 1");
      break;
    case TestKind::Proportions:
      validate_theta(Theta::vector(cfg.theta));
      if (cfg.n1 < 1 || cfg.n2 < 1) throw Error(ErrorCode::InvalidArgument, "n1, n2 must be >= 1");
      break;
  }
}

std::vector<CountTable> sample_null_tables(const ReliabilityConfig& cfg, Stream& rng) {
  switch (cfg.test) {
    case TestKind::Independence:
      return {draw_table(cfg.p_row.size(), cfg.p_col.size(), cfg.n0, outer(cfg.p_row, cfg.p_col), rng)};
    case TestKind::GoodnessOfFit:
      return {draw_table(1, cfg.theta.size(), cfg.n0, cfg.theta, rng)};
    case TestKind::Proportions:
      return {draw_table(1, cfg.theta.size(), cfg.n1, cfg.theta, rng),
              draw_table(1, cfg.theta.size(), cfg.n2, cfg.theta, rng)};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown test kind");
}

double ks_uniform(std::vector<double> pvalues) {
  if (pvalues.empty()) throw Error(ErrorCode::EmptyInput, "ks_uniform needs at least one value");
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::OutOfRange, "p-values must lie in [0, 1]");
  }
  return ks_against(std::move(pvalues), [](double x) { return x; });
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "ks_two_sample needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

QQSeries reliability_series(const ReliabilityConfig& cfg, double epsilon) {
  validate_reliability(cfg);
  const std::uint64_t table_seed = derive_seed(cfg.seed, "null_table");
  const std::uint64_t noise_seed = derive_seed(cfg.seed, "privatize");
  const std::uint64_t test_seed = derive_seed(cfg.seed, "test");
  const NoiseSpec spec = NoiseSpec::laplace(epsilon, cfg.sensitivity);
  std::optional<Theta> theta0;
  if (cfg.test == TestKind::GoodnessOfFit) theta0 = Theta::vector(cfg.theta);

  constexpr double kSkipped = -1.0;
  std::vector<double> pvals(cfg.trials, kSkipped);
  parallel_blocks(cfg.trials, resolve_threads(cfg.threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t trial = begin; trial < end; ++trial) {
      Stream table_rng(table_seed, trial);
      const auto exact = sample_null_tables(cfg, table_rng);
      Stream noise_rng(noise_seed, trial);
      std::vector<NoisyTable> noisy;
      for (const auto& t : exact) noisy.push_back(perturb_table(t, spec, noise_rng, noise_seed));
      const TestRequest req = make_request(cfg.test, cfg.statistic, std::move(noisy), theta0, cfg.m,
                                           derive_seed(test_seed, trial));
      try {
        pvals[trial] = cfg.method == PValueMethod::Ours ? run_test(req).p_value : naive_js_pvalue(req);
      } catch (const Error& e) {
        if (!is_degenerate(e)) throw;
      }
    }
  });

  QQSeries out;
  out.epsilon = epsilon;
  out.method = cfg.method;
  for (std::size_t trial = 0; trial < pvals.size(); ++trial) {
    if (pvals[trial] == kSkipped) {
      ++out.skipped;
      continue;
    }
    out.points.push_back(QQPoint{trial, pvals[trial], 0.0});
  }
  if (out.points.empty()) throw Error(ErrorCode::DegenerateMargins, "every trial produced a degenerate table");
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const QQPoint& a, const QQPoint& b) { return a.p_value < b.p_value; });
  const double n = static_cast<double>(out.points.size());
  std::vector<double> values;
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    out.points[i].uniform_quantile = static_cast<double>(i + 1) / (n + 1.0);
    values.push_back(out.points[i].p_value);
    if (out.points[i].p_value <= 0.05) ++rejected;
  }
  out.ks = ks_uniform(std::move(values));
  out.rejection_rate_05 = static_cast<double>(rejected) / n;
  return out;
}

std::vector<QQSeries> reliability_experiment(const ReliabilityConfig& cfg) {
  validate_reliability(cfg);
  std::vector<QQSeries> out;
  for (double eps : cfg.epsilons) out.push_back(reliability_series(cfg, eps));
  return out;
}

double sample_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::OutOfRange, "quantile level must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<AgreementRow> agreement_experiment(const AgreementConfig& cfg) {
  if (cfg.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  if (cfg.epsilons.empty()) throw Error(ErrorCode::InvalidArgument, "at least one epsilon is required");
  if (cfg.statistics.empty()) throw Error(ErrorCode::InvalidArgument, "at least one statistic is required");
  const std::size_t expected_tables = cfg.test == TestKind::Proportions ? 2 : 1;
  if (cfg.tables.size() != expected_tables) {
    throw Error(ErrorCode::InvalidArgument, test_name(cfg.test) + " needs " + std::to_string(expected_tables) +
                                                " table(s)");
  }
  const std::uint64_t reference_seed = derive_seed(cfg.seed, "agreement_reference");
  const std::uint64_t noise_seed = derive_seed(cfg.seed, "privatize");

  std::vector<AgreementRow> rows;
  for (double eps : cfg.epsilons) {
    const NoiseSpec spec = NoiseSpec::laplace(eps, cfg.sensitivity);
    for (StatisticKind stat : cfg.statistics) {
      std::vector<NoisyTable> exact;
      for (const auto& t : cfg.tables) exact.push_back(perturb_table(t, NoiseSpec::identity(), 0));
      AgreementRow row;
      row.epsilon = eps;
      row.statistic = stat;
      row.nonprivate_p = run_test(make_request(cfg.test, stat, exact, cfg.theta0, cfg.m, reference_seed)).p_value;

      constexpr double kSkipped = -1.0;
      std::vector<double> pvals(cfg.repeats, kSkipped);
      parallel_blocks(cfg.repeats, resolve_threads(cfg.threads), [&](std::size_t begin, std::size_t end) {
        for (std::size_t rep = begin; rep < end; ++rep) {
          Stream noise_rng(noise_seed, rep);
          std::vector<NoisyTable> noisy;
          for (const auto& t : cfg.tables) noisy.push_back(perturb_table(t, spec, noise_rng, noise_seed));
          try {
            pvals[rep] =
                run_test(make_request(cfg.test, stat, std::move(noisy), cfg.theta0, cfg.m, reference_seed)).p_value;
          } catch (const Error& e) {
            if (!is_degenerate(e)) throw;
          }
        }
      });
      std::vector<double> used;
      for (double p : pvals) {
        if (p == kSkipped) {
          ++row.skipped;
        } else {
          used.push_back(p);
        }
      }
      row.repeats_used = used.size();
      if (used.empty()) {
        row.mean_p = row.p10 = row.p90 = std::numeric_limits<double>::quiet_NaN();
      } else {
        double sum = 0.0;
        for (double p : used) sum += p;
        row.mean_p = sum / static_cast<double>(used.size());
        std::sort(used.begin(), used.end());
        row.p10 = sample_quantile(used, 0.1);
        row.p90 = sample_quantile(used, 0.9);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

CountTable builtin_fixture(const std::string& name) {
  if (name == "election") return CountTable::from_rows({{238, 262}, {265, 235}});
  if (name == "nyc_taxi") {
    return CountTable::from_rows({{68685857, 46625277, 980220},
                                  {12711902, 10180961, 166088},
                                  {5232235, 5043192, 82001},
                                  {8941327, 6318250, 147051}});
  }
  throw Error(ErrorCode::UnknownFixture, "unknown fixture '" + name + "'");
}

std::vector<std::string> builtin_fixture_names() { return {"election", "nyc_taxi"}; }

void write_qq_csv(std::ostream& os, const std::vector<QQSeries>& series, std::size_t thin) {
  const std::size_t step = thin == 0 ? 1 : thin;
  os << "trial,p_value,uniform_quantile,epsilon,method\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.points.size(); i += step) {
      const auto& pt = s.points[i];
      os << pt.trial << ',' << format_double(pt.p_value) << ',' << format_double(pt.uniform_quantile) << ','
         << format_double(s.epsilon) << ',' << method_name(s.method) << '\n';
    }
  }
}

void write_agreement_csv(std::ostream& os, const std::vector<AgreementRow>& rows) {
  os << "epsilon,statistic,mean_p,p10,p90,nonprivate_p\n";
  for (const auto& r : rows) {
    os << format_double(r.epsilon) << ',' << statistic_name(r.statistic) << ',' << format_double(r.mean_p) << ','
       << format_double(r.p10) << ',' << format_double(r.p90) << ',' << format_double(r.nonprivate_p) << '\n';
  }
}

}  // namespace dpht
