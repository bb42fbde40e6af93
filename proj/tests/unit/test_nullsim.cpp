#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "dpht/error.hpp"
#include "dpht/evalharness.hpp"
#include "dpht/nullsim.hpp"

using namespace dpht;

namespace {

std::vector<double> draw_many(const NullSamplerConfig& cfg, std::size_t count, std::uint64_t seed) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    Stream rng(seed, k);
    out[k] = sample_null(cfg, rng);
  }
  return out;
}

double ks_chi2(const std::vector<double>& sample, int df) {
  return ks_against(sample, [df](double x) { return 1.0 - classical_pvalue_chi2(std::max(x, 0.0), df); });
}

NullSamplerConfig independence_config(std::size_t r, std::size_t c, double n0, const NoiseSpec& noise) {
  NullSamplerConfig cfg;
  cfg.test = TestKind::Independence;
  cfg.theta0 = Theta::matrix(r, c, std::vector<double>(r * c, 1.0 / static_cast<double>(r * c)));
  cfg.n0 = n0;
  cfg.noise = noise;
  return cfg;
}

}  // namespace

TEST_CASE("multinomial gaussian: zero sum and covariance") {
  const std::vector<double> theta{0.1, 0.1, 0.8};
  const std::size_t draws = 100000;
  std::vector<double> mean(3, 0.0), cov(9, 0.0);
  for (std::size_t k = 0; k < draws; ++k) {
    Stream rng(41, k);
    const auto a = sample_multinomial_gaussian(theta, rng);
    REQUIRE(std::fabs(a[0] + a[1] + a[2]) < 1e-12);
    for (int i = 0; i < 3; ++i) {
      mean[i] += a[i];
      for (int j = 0; j < 3; ++j) cov[i * 3 + j] += a[i] * a[j];
    }
  }
  for (int i = 0; i < 3; ++i) {
    const double sd = std::sqrt(theta[i] * (1 - theta[i]) / draws);
    CHECK(std::fabs(mean[i] / draws) < 4 * sd);
    for (int j = 0; j < 3; ++j) {
      const double want = (i == j ? theta[i] : 0.0) - theta[i] * theta[j];
      CHECK(std::fabs(cov[i * 3 + j] / draws - want) < 0.01);
    }
  }
  Stream rng(1);
  CHECK_THROWS_AS(sample_multinomial_gaussian(std::vector<double>{0.0, 1.0}, rng), Error);
}

TEST_CASE("theta estimates") {
  NoisyTable nt;
  nt.table = RealTable{2, 2, {238, 262, 265, 235}};
  nt.n0_declared = 1000;
  const ThetaEstimate est = estimate_theta_independence(nt);
  CHECK_FALSE(est.repaired);
  CHECK(est.theta.at(0, 0) == doctest::Approx(0.5 * 0.503));
  CHECK(est.theta.at(1, 1) == doctest::Approx(0.5 * 0.497));

  nt.table = RealTable{2, 2, {-30, 10, 15, 500}};
  const ThetaEstimate repaired = estimate_theta_independence(nt);
  CHECK(repaired.repaired);
  CHECK(std::fabs(std::accumulate(repaired.theta.p.begin(), repaired.theta.p.end(), 0.0) - 1.0) < 1e-12);
  for (double p : repaired.theta.p) CHECK(p > 0);

  nt.table = RealTable{2, 2, {-30, 10, 15, -500}};
  CHECK_THROWS_AS(estimate_theta_independence(nt), Error);

  NoisyTable a, b;
  a.table = RealTable{1, 3, {10, 30, 60}};
  b.table = RealTable{1, 3, {20, 60, 120}};
  const auto pooled = estimate_theta_proportions(a, b, 100, 200);
  CHECK(pooled.theta.p[0] == doctest::Approx(0.1));
  CHECK(pooled.theta.p[2] == doctest::Approx(0.6));
  b.table = RealTable{1, 3, {-40, 60, 120}};
  CHECK(estimate_theta_proportions(a, b, 100, 200).repaired);
}

TEST_CASE("independence null at infinite epsilon is chi-squared") {
  const auto cfg = independence_config(2, 2, 1000, NoiseSpec::identity());
  const auto sample = draw_many(cfg, 100000, 5);
  for (double t : sample) REQUIRE(t >= -1e-12);
  CHECK(ks_chi2(sample, 1) < 0.01);
  CHECK(draw_many(cfg, 50, 5) == std::vector<double>(sample.begin(), sample.begin() + 50));
}

TEST_CASE("uniform 2x2 independence null is nonnegative with noise") {
  const auto cfg = independence_config(2, 2, 1000, NoiseSpec::laplace(0.2));
  for (double t : draw_many(cfg, 200000, 6)) REQUIRE(t >= -1e-9);
}

TEST_CASE("noise widens the independence null") {
  const auto quiet = draw_many(independence_config(2, 2, 1000, NoiseSpec::identity()), 20000, 7);
  const auto noisy = draw_many(independence_config(2, 2, 1000, NoiseSpec::laplace(0.2)), 20000, 7);
  const double mq = std::accumulate(quiet.begin(), quiet.end(), 0.0) / quiet.size();
  const double mn = std::accumulate(noisy.begin(), noisy.end(), 0.0) / noisy.size();
  CHECK(mq == doctest::Approx(1.0).epsilon(0.05));
  CHECK(mn > 1.2 * mq);
}

TEST_CASE("proportions null: classical limit and symmetry") {
  NullSamplerConfig cfg;
  cfg.test = TestKind::Proportions;
  cfg.theta0 = Theta::vector({0.5, 0.5});
  cfg.n1 = 300;
  cfg.n2 = 700;
  cfg.noise = NoiseSpec::identity();
  cfg.noise2 = NoiseSpec::identity();
  const auto classical = draw_many(cfg, 100000, 8);
  for (double t : classical) REQUIRE(t >= 0);
  CHECK(ks_chi2(classical, 1) < 0.01);

  cfg.noise = NoiseSpec::laplace(0.5);
  cfg.noise2 = NoiseSpec::laplace(0.2);
  const auto forward = draw_many(cfg, 50000, 9);
  std::swap(cfg.n1, cfg.n2);
  std::swap(cfg.noise, cfg.noise2);
  const auto swapped = draw_many(cfg, 50000, 10);
  CHECK(ks_two_sample(forward, swapped) < 0.015);
}

TEST_CASE("gof null: classical limit, boundary, and gaussian-limit agreement") {
  const Theta theta = Theta::vector({0.25, 0.25, 0.25, 0.25});
  std::vector<double> exact(40000);
  for (std::size_t k = 0; k < exact.size(); ++k) {
    Stream rng(12, k);
    exact[k] = sample_gof_null(theta, 10000, NoiseSpec::identity(), StatisticKind::Chi2, rng);
  }
  CHECK(ks_chi2(exact, 3) < 0.015);

  Stream one(13);
  const double t1 = sample_gof_null(theta, 1, NoiseSpec::laplace(1.0), StatisticKind::LR, one);
  CHECK(std::isfinite(t1));

  const NoiseSpec noise = NoiseSpec::laplace(0.2);
  std::vector<double> multinomial(20000), limit(20000);
  for (std::size_t k = 0; k < multinomial.size(); ++k) {
    Stream a(14, k), b(15, k);
    multinomial[k] = sample_gof_null(theta, 100000, noise, StatisticKind::Chi2, a, GofMethod::ExactMultinomial);
    limit[k] = sample_gof_null(theta, 100000, noise, StatisticKind::Chi2, b, GofMethod::GaussianLimit);
  }
  CHECK(ks_two_sample(multinomial, limit) < 0.02);
}

TEST_CASE("config validation") {
  NullSamplerConfig cfg = independence_config(2, 2, 1000, NoiseSpec::identity());
  CHECK_NOTHROW(validate_config(cfg));
  cfg.n0 = 0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = independence_config(2, 2, 1000, NoiseSpec::identity());
  cfg.theta0 = Theta::matrix(2, 2, {0.5, 0.5, 0.0, 0.0});
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.theta0 = Theta::vector({0.5, 0.5});
  CHECK_THROWS_AS(validate_config(cfg), Error);
  CHECK(parse_test(test_name(TestKind::Proportions)) == TestKind::Proportions);
}
