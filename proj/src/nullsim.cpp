#include "dpht/nullsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpht/error.hpp"

namespace dpht {

std::string test_name(TestKind kind) {
  switch (kind) {
    case TestKind::GoodnessOfFit: return "gof";
    case TestKind::Proportions: return "proportions";
    case TestKind::Independence: return "independence";
  }
  return "unknown";
}

TestKind parse_test(const std::string& name) {
  if (name == "gof") return TestKind::GoodnessOfFit;
  if (name == "proportions") return TestKind::Proportions;
  if (name == "independence") return TestKind::Independence;
  throw Error(ErrorCode::InvalidArgument, "unknown test '" + name + "'");
}

void sample_multinomial_gaussian(std::span<const double> theta, Stream& rng, std::span<double> out) {
  if (theta.size() != out.size() || theta.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sample_multinomial_gaussian: size mismatch");
  }
  // out holds z first, then is overwritten in place.
  double projection = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!(theta[k] > 0.0)) throw Error(ErrorCode::ZeroThetaCell, "theta has a zero cell");
    out[k] = rng.normal();
    projection += std::sqrt(theta[k]) * out[k];
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double s = std::sqrt(theta[k]);
    out[k] = s * (out[k] - s * projection);
  }
}

std::vector<double> sample_multinomial_gaussian(std::span<const double> theta, Stream& rng) {
  std::vector<double> out(theta.size());
  sample_multinomial_gaussian(theta, rng, out);
  return out;
}

ThetaEstimate repair_theta(std::size_t rows, std::size_t cols, std::vector<double> raw, double delta) {
  ThetaEstimate est;
  for (auto& v : raw) {
    if (!(v >= delta)) {
      v = delta;
      est.repaired = true;
    }
  }
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (auto& v : raw) v /= sum;
  // Push the last round-off into the largest entry so the sum is 1 to ~1 ulp.
  const double residual = 1.0 - std::accumulate(raw.begin(), raw.end(), 0.0);
  auto largest = std::max_element(raw.begin(), raw.end());
  *largest += residual;
  est.theta = Theta{rows, cols, std::move(raw)};
  validate_theta(est.theta);
  return est;
}

ThetaEstimate estimate_theta_independence(const NoisyTable& nt, double delta) {
  const RealTable& t = nt.table;
  const double total = t.total();
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateTotal, "noisy grand total <= 0");
  const auto rs = t.row_sums();
  const auto cs = t.col_sums();
  std::vector<double> raw(t.values.size());
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) raw[i * t.cols + j] = rs[i] * cs[j] / (total * total);
  return repair_theta(t.rows, t.cols, std::move(raw), delta);
}

ThetaEstimate estimate_theta_proportions(const NoisyTable& nt, const NoisyTable& ns, double n1, double n2,
                                         double delta) {
  const auto& tv = nt.values();
  const auto& sv = ns.values();
  if (tv.size() != sv.size() || tv.empty()) throw Error(ErrorCode::InvalidArgument, "proportions: length mismatch");
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw Error(ErrorCode::DegenerateTotal, "proportions: n1, n2 must be > 0");
  std::vector<double> raw(tv.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < tv.size(); ++k) {
    raw[k] = (tv[k] + sv[k]) / (n1 + n2);
    sum += raw[k];
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::DegenerateTotal, "pooled noisy total <= 0");
  return repair_theta(1, tv.size(), std::move(raw), delta);
}

void validate_config(const NullSamplerConfig& cfg) {
  validate_theta(cfg.theta0);
  for (double p : cfg.theta0.p) {
    if (!(p > 0.0)) throw Error(ErrorCode::ZeroThetaCell, "theta0 has a zero cell");
  }
  switch (cfg.test) {
    case TestKind::Independence:
      if (cfg.theta0.rows < 2 || cfg.theta0.cols < 2) {
        throw Error(ErrorCode::InvalidArgument, "independence null needs a 2-D theta0");
      }
      [[fallthrough]];
    case TestKind::GoodnessOfFit:
      if (!(cfg.n0 >= 1.0)) throw Error(ErrorCode::InvalidArgument, "n0 must be >= 1");
      break;
    case TestKind::Proportions:
      if (!(cfg.n1 >= 1.0) || !(cfg.n2 >= 1.0)) throw Error(ErrorCode::InvalidArgument, "n1, n2 must be >= 1");
      break;
  }
}

double sample_independence_null(const NullSamplerConfig& cfg, Stream& rng) {
  const Theta& th = cfg.theta0;
  const std::size_t rows = th.rows;
  const std::size_t cols = th.cols;
  const double kappa = 1.0 / std::sqrt(cfg.n0);

  std::vector<double> x(th.size());
  sample_multinomial_gaussian(th.p, rng, x);
  for (auto& v : x) v += kappa * cfg.noise.draw(rng);

  std::vector<double> x_row(rows, 0.0), x_col(cols, 0.0), th_row(rows, 0.0), th_col(cols, 0.0);
  double x_total = 0.0;
  double t = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double xv = x[i * cols + j];
      const double tv = th.p[i * cols + j];
      t += xv * xv / tv;
      x_row[i] += xv;
      x_col[j] += xv;
      th_row[i] += tv;
      th_col[j] += tv;
      x_total += xv;
    }
  }
  for (std::size_t i = 0; i < rows; ++i) t -= x_row[i] * x_row[i] / th_row[i];
  for (std::size_t j = 0; j < cols; ++j) t -= x_col[j] * x_col[j] / th_col[j];
  t += x_total * x_total;
  return t;
}

double sample_proportions_null(const NullSamplerConfig& cfg, Stream& rng) {
  const auto& th = cfg.theta0.p;
  const std::size_t cells = th.size();
  const double w1 = std::sqrt(cfg.n2 / (cfg.n1 + cfg.n2));
  const double w2 = std::sqrt(cfg.n1 / (cfg.n1 + cfg.n2));
  const double kappa1 = 1.0 / std::sqrt(cfg.n1);
  const double kappa2 = 1.0 / std::sqrt(cfg.n2);

  std::vector<double> x1(cells), x2(cells);
  sample_multinomial_gaussian(th, rng, x1);
  sample_multinomial_gaussian(th, rng, x2);
  for (auto& v : x1) v += kappa1 * cfg.noise.draw(rng);
  for (auto& v : x2) v += kappa2 * cfg.noise2.draw(rng);

  double t = 0.0;
  for (std::size_t j = 0; j < cells; ++j) {
    const double d = w1 * x1[j] - w2 * x2[j];
    t += d * d / th[j];
  }
  return t;
}

double sample_gof_null(const NullSamplerConfig& cfg, Stream& rng) {
  const auto& th = cfg.theta0.p;
  const std::size_t cells = th.size();
  if (cfg.gof_method == GofMethod::GaussianLimit) {
    const double kappa = 1.0 / std::sqrt(cfg.n0);
    std::vector<double> a(cells);
    sample_multinomial_gaussian(th, rng, a);
    double t = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
      const double x = a[j] + kappa * cfg.noise.draw(rng);
      t += x * x / th[j];
    }
    return t;
  }

  const auto n0 = static_cast<std::int64_t>(std::llround(cfg.n0));
  std::vector<std::int64_t> q(cells);
  rng.multinomial(n0, th, q);
  std::vector<double> noisy(cells);
  for (std::size_t j = 0; j < cells; ++j) noisy[j] = static_cast<double>(q[j]) + cfg.noise.draw(rng);
  StatOptions opts;
  opts.clamp_delta = cfg.clamp_delta;
  if (cfg.statistic == StatisticKind::Chi2) return chi2_gof(noisy, th, cfg.n0, opts).value;
  return lr_gof(noisy, th, cfg.n0, opts).value;
}

double sample_gof_null(const Theta& theta0, std::int64_t n0, const NoiseSpec& spec, StatisticKind stat, Stream& rng,
                       GofMethod method) {
  NullSamplerConfig cfg;
  cfg.test = TestKind::GoodnessOfFit;
  cfg.statistic = stat;
  cfg.theta0 = theta0;
  cfg.n0 = static_cast<double>(n0);
  cfg.noise = spec;
  cfg.gof_method = method;
  validate_config(cfg);
  return sample_gof_null(cfg, rng);
}

double sample_null(const NullSamplerConfig& cfg, Stream& rng) {
  switch (cfg.test) {
    case TestKind::Independence: return sample_independence_null(cfg, rng);
    case TestKind::Proportions: return sample_proportions_null(cfg, rng);
    case TestKind::GoodnessOfFit: return sample_gof_null(cfg, rng);
  }
  throw Error(ErrorCode::SamplerFailure, "unknown test kind");
}

}  // namespace dpht
