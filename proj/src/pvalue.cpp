#include "dpht/pvalue.hpp"

#include <algorithm>
#include <cmath>

#include "dpht/error.hpp"
#include "dpht/parallel.hpp"

namespace dpht {

namespace {

void validate_request(const TestRequest& req) {
  if (req.m < 1) throw Error(ErrorCode::InvalidArgument, "m must be >= 1");
  switch (req.test) {
    case TestKind::GoodnessOfFit:
    case TestKind::Independence:
      if (req.tables.size() != 1) {
        throw Error(ErrorCode::InvalidArgument, test_name(req.test) + " takes exactly one table");
      }
      break;
    case TestKind::Proportions:
      if (req.tables.size() != 2) throw Error(ErrorCode::InvalidArgument, "proportions takes exactly two tables");
      if (req.tables[0].values().size() != req.tables[1].values().size()) {
        throw Error(ErrorCode::InvalidArgument, "proportions tables differ in cell count");
      }
      break;
  }
  if (req.test == TestKind::GoodnessOfFit) {
    if (!req.theta0) throw Error(ErrorCode::InvalidArgument, "gof requires theta0");
    validate_theta(*req.theta0);
    if (req.theta0->size() != req.tables[0].values().size()) {
      throw Error(ErrorCode::InvalidArgument, "theta0 length does not match the table");
    }
  }
  if (req.statistic == StatisticKind::LL || req.statistic == StatisticKind::Diff) {
    throw Error(ErrorCode::InvalidArgument,
                "statistic '" + statistic_name(req.statistic) + "' has no asymptotic null; use the testbed");
  }
  for (const auto& nt : req.tables) {
    if (nt.n0_declared < 1) throw Error(ErrorCode::DegenerateTotal, "declared table size must be >= 1");
  }
}

double noise_sd(const TestRequest& req) {
  double sd = 0.0;
  for (const auto& nt : req.tables) sd = std::max(sd, nt.provenance.noise.std_dev());
  return sd;
}

}  // namespace

bool TestResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

TestResult monte_carlo_pvalue(double t_star, const ReferenceSampler& sampler, std::size_t m, std::uint64_t seed,
                              unsigned threads, bool smoothing) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be >= 1");
  const std::uint64_t ref_seed = derive_seed(seed, "reference");
  std::vector<unsigned char> hit(m, 0);
  parallel_blocks(m, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t l = begin; l < end; ++l) {
      Stream rng(ref_seed, l);
      const double t = sampler(rng);
      if (std::isnan(t)) throw Error(ErrorCode::SamplerFailure, "reference statistic is NaN");
      hit[l] = t >= t_star ? 1 : 0;
    }
  });
  TestResult out;
  out.t_star = t_star;
  out.m = m;
  out.seed = seed;
  out.exceed = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  out.p_value = smoothing ? static_cast<double>(out.exceed + 1) / static_cast<double>(m + 1)
                          : static_cast<double>(out.exceed) / static_cast<double>(m);
  return out;
}

StatValue observed_statistic(const TestRequest& req) {
  validate_request(req);
  StatOptions opts;
  opts.clamp_delta = req.clamp_delta;
  opts.noise_sd = noise_sd(req);
  const NoisyTable& nt = req.tables[0];
  switch (req.test) {
    case TestKind::Independence:
      switch (req.statistic) {
        case StatisticKind::Chi2: return chi2_independence(nt.table, opts).stat;
        case StatisticKind::LR: return lr_independence(nt.table, opts).stat;
        default: {
          const auto chi = chi2_independence(nt.table, opts);
          auto v = lr_modified(nt.values(), chi.expected.values, opts);
          v.clamped = v.clamped || chi.stat.clamped;
          return v;
        }
      }
    case TestKind::Proportions: {
      const auto& tv = req.tables[0].values();
      const auto& sv = req.tables[1].values();
      const auto n1 = static_cast<double>(req.tables[0].n0_declared);
      const auto n2 = static_cast<double>(req.tables[1].n0_declared);
      switch (req.statistic) {
        case StatisticKind::Chi2: return chi2_proportions(tv, sv, n1, n2, opts);
        case StatisticKind::LR: return lr_proportions(tv, sv, n1, n2, opts);
        default: {
          const auto e = expected_proportions(tv, sv, n1, n2);
          std::vector<double> values(tv.begin(), tv.end());
          values.insert(values.end(), sv.begin(), sv.end());
          std::vector<double> expected = e.e1;
          expected.insert(expected.end(), e.e2.begin(), e.e2.end());
          return lr_modified(values, expected, opts);
        }
      }
    }
    case TestKind::GoodnessOfFit: {
      const auto n0 = static_cast<double>(nt.n0_declared);
      if (req.statistic == StatisticKind::Chi2) return chi2_gof(nt.values(), req.theta0->p, n0, opts);
      return lr_gof(nt.values(), req.theta0->p, n0, opts);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown test kind");
}

NullSamplerConfig null_config(const TestRequest& req, bool* theta_repaired) {
  validate_request(req);
  NullSamplerConfig cfg;
  cfg.test = req.test;
  cfg.statistic = req.statistic;
  cfg.gof_method = req.gof_method;
  cfg.clamp_delta = req.clamp_delta;
  cfg.noise = req.tables[0].provenance.noise;
  bool repaired = false;
  switch (req.test) {
    case TestKind::Independence: {
      auto est = estimate_theta_independence(req.tables[0], req.clamp_delta);
      cfg.theta0 = std::move(est.theta);
      repaired = est.repaired;
      cfg.n0 = static_cast<double>(req.tables[0].n0_declared);
      break;
    }
    case TestKind::Proportions: {
      cfg.n1 = static_cast<double>(req.tables[0].n0_declared);
      cfg.n2 = static_cast<double>(req.tables[1].n0_declared);
      cfg.noise2 = req.tables[1].provenance.noise;
      auto est = estimate_theta_proportions(req.tables[0], req.tables[1], cfg.n1, cfg.n2, req.clamp_delta);
      cfg.theta0 = std::move(est.theta);
      repaired = est.repaired;
      break;
    }
    case TestKind::GoodnessOfFit:
      cfg.theta0 = *req.theta0;
      cfg.n0 = static_cast<double>(req.tables[0].n0_declared);
      break;
  }
  validate_config(cfg);
  if (theta_repaired) *theta_repaired = repaired;
  return cfg;
}

TestResult run_test(const TestRequest& req) {
  const StatValue observed = observed_statistic(req);
  bool repaired = false;
  const NullSamplerConfig cfg = null_config(req, &repaired);
  TestResult out = monte_carlo_pvalue(
      observed.value, [&cfg](Stream& rng) { return sample_null(cfg, rng); }, req.m, req.seed, req.threads,
      req.smoothing);
  out.test = req.test;
  out.statistic = req.statistic;
  if (observed.clamped) out.flags.emplace_back("clamped");
  if (observed.low_count_warning) out.flags.emplace_back("low_count_warning");
  if (repaired) out.flags.emplace_back("theta_repaired");
  for (const auto& nt : req.tables) {
    out.inputs.push_back(nt.provenance);
    if (!nt.provenance.noise.pure_dp && !out.has_flag("non_pure_dp")) out.flags.emplace_back("non_pure_dp");
  }
  return out;
}

int classical_df(const TestRequest& req) {
  const NoisyTable& nt = req.tables.at(0);
  switch (req.test) {
    case TestKind::Independence: return df_independence(nt.rows(), nt.cols());
    case TestKind::Proportions:
    case TestKind::GoodnessOfFit: return df_gof(nt.values().size());
  }
  return 0;
}

double naive_js_pvalue(const TestRequest& req) {
  const StatValue observed = observed_statistic(req);
  return classical_pvalue_chi2(observed.value, classical_df(req));
}

double naive_js_pvalue(const NoisyTable& nt, TestKind test, StatisticKind stat, const std::optional<Theta>& theta0) {
  TestRequest req;
  req.test = test;
  req.statistic = stat;
  req.tables = {nt};
  req.theta0 = theta0;
  return naive_js_pvalue(req);
}

}  // namespace dpht
