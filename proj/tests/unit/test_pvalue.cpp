#include <doctest.h>

#include <cmath>
#include <limits>

#include "dpht/error.hpp"
#include "dpht/evalharness.hpp"
#include "dpht/pvalue.hpp"

using namespace dpht;

namespace {

NoisyTable exact_release(const CountTable& t) { return perturb_table(t, NoiseSpec::identity(), 0); }

NoisyTable fig1b() {
  NoisyTable nt;
  nt.table = RealTable{2, 2, {227.85, 279.24, 253.11, 221.42}};
  nt.n0_declared = 1000;
  nt.provenance.noise = NoiseSpec::laplace(0.2);
  return nt;
}

TestRequest independence(const NoisyTable& nt, StatisticKind stat, std::size_t m, std::uint64_t seed) {
  TestRequest req;
  req.test = TestKind::Independence;
  req.statistic = stat;
  req.tables = {nt};
  req.m = m;
  req.seed = seed;
  return req;
}

}  // namespace

TEST_CASE("monte carlo edge cases and the tie rule") {
  const ReferenceSampler normal = [](Stream& s) { return s.normal(); };
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(monte_carlo_pvalue(-inf, normal, 100, 1).p_value == 1.0);
  CHECK(monte_carlo_pvalue(inf, normal, 100, 1).p_value == 0.0);
  CHECK(monte_carlo_pvalue(inf, normal, 99, 1, 1, true).p_value == doctest::Approx(0.01));
  const ReferenceSampler five = [](Stream&) { return 5.0; };
  const TestResult tie = monte_carlo_pvalue(5.0, five, 10, 1);
  CHECK(tie.exceed == 10);
  CHECK(tie.p_value == 1.0);
  CHECK_THROWS_AS(monte_carlo_pvalue(0.0, normal, 0, 1), Error);
  const ReferenceSampler nan = [](Stream&) { return std::nan(""); };
  CHECK_THROWS_AS(monte_carlo_pvalue(0.0, nan, 10, 1), Error);
}

TEST_CASE("monte carlo p-value is non-increasing in t_star") {
  const ReferenceSampler normal = [](Stream& s) { return s.normal(); };
  double prev = 1.0;
  for (double t = -3.0; t <= 3.0; t += 0.25) {
    const double p = monte_carlo_pvalue(t, normal, 2000, 3).p_value;
    CHECK(p <= prev);
    CHECK(p * 2000 == doctest::Approx(std::round(p * 2000)));
    prev = p;
  }
}

TEST_CASE("exceedance count does not depend on thread count") {
  const ReferenceSampler normal = [](Stream& s) { return s.normal() + s.laplace(1.0); };
  const auto serial = monte_carlo_pvalue(0.3, normal, 10007, 17, 1);
  for (unsigned threads : {2u, 3u, 8u}) CHECK(monte_carlo_pvalue(0.3, normal, 10007, 17, threads).exceed == serial.exceed);
}

TEST_CASE("exact election table reproduces the classical p-value") {
  const TestResult r = run_test(independence(exact_release(builtin_fixture("election")), StatisticKind::LR, 100000, 1));
  CHECK(r.t_star == doctest::Approx(2.9175241183931533));
  CHECK(std::fabs(r.p_value - 0.0876) < 0.01);
  CHECK(r.p_value == static_cast<double>(r.exceed) / 100000.0);
}

TEST_CASE("run_test is bit-identical for a fixed seed and any thread count") {
  const NoisyTable nt = perturb_table(builtin_fixture("election"), NoiseSpec::laplace(0.2), 99);
  TestRequest req = independence(nt, StatisticKind::Chi2, 5000, 7);
  const TestResult a = run_test(req);
  const TestResult b = run_test(req);
  req.threads = 4;
  const TestResult c = run_test(req);
  CHECK(a.exceed == b.exceed);
  CHECK(a.exceed == c.exceed);
  CHECK(a.t_star == c.t_star);
  CHECK(a.inputs.size() == 1);
  CHECK(a.inputs[0].seed == 99);
}

TEST_CASE("baseline on the printed noisy table") {
  CHECK(std::fabs(naive_js_pvalue(fig1b(), TestKind::Independence, StatisticKind::LR) - 0.0084) < 0.0005);
  const double exact = naive_js_pvalue(exact_release(builtin_fixture("election")), TestKind::Independence,
                                       StatisticKind::LR);
  CHECK(exact == doctest::Approx(classical_pvalue_chi2(2.9175241183931533, 1)));
}

TEST_CASE("the private test does not reject on the noisy table") {
  const TestResult r = run_test(independence(fig1b(), StatisticKind::LR, 10000, 2));
  CHECK(r.t_star == doctest::Approx(6.93948).epsilon(1e-5));
  CHECK(r.p_value > 0.05);
}

TEST_CASE("goodness of fit with a perfect fit") {
  TestRequest req;
  req.test = TestKind::GoodnessOfFit;
  req.statistic = StatisticKind::Chi2;
  req.theta0 = Theta::vector({0.25, 0.25, 0.5});
  NoisyTable nt;
  nt.table = RealTable{1, 3, {2.5e7, 2.5e7, 5e7}};
  nt.n0_declared = 100000000;
  nt.provenance.noise = NoiseSpec::laplace(1.0);
  req.tables = {nt};
  req.m = 2000;
  req.seed = 4;
  CHECK(run_test(req).p_value > 0.9);
  req.gof_method = GofMethod::GaussianLimit;
  CHECK(run_test(req).p_value > 0.9);
  req.statistic = StatisticKind::LR;
  CHECK(run_test(req).p_value > 0.9);
}

TEST_CASE("proportions with identical tables") {
  const CountTable t = CountTable(1, 3, {200, 300, 500});
  TestRequest req;
  req.test = TestKind::Proportions;
  req.statistic = StatisticKind::LR;
  req.tables = {exact_release(t), exact_release(t)};
  req.m = 2000;
  CHECK(run_test(req).p_value > 0.99);
  req.statistic = StatisticKind::LRModified;
  CHECK(run_test(req).p_value > 0.99);
}

TEST_CASE("LR-modified and LR agree on independence") {
  const NoisyTable nt = perturb_table(builtin_fixture("election"), NoiseSpec::laplace(0.5), 3);
  const auto lr = observed_statistic(independence(nt, StatisticKind::LR, 10, 1));
  const auto mod = observed_statistic(independence(nt, StatisticKind::LRModified, 10, 1));
  CHECK(mod.value == doctest::Approx(lr.value).epsilon(1e-9));
}

TEST_CASE("request validation") {
  const NoisyTable nt = exact_release(builtin_fixture("election"));
  TestRequest req = independence(nt, StatisticKind::LL, 10, 1);
  CHECK_THROWS_AS(run_test(req), Error);
  req.statistic = StatisticKind::Chi2;
  req.m = 0;
  CHECK_THROWS_AS(run_test(req), Error);
  req.m = 10;
  req.tables.push_back(nt);
  CHECK_THROWS_AS(run_test(req), Error);
  req.test = TestKind::GoodnessOfFit;
  req.tables = {nt};
  CHECK_THROWS_AS(run_test(req), Error);
  req.theta0 = Theta::vector({0.5, 0.5});
  CHECK_THROWS_AS(run_test(req), Error);
  req.test = TestKind::Proportions;
  req.tables = {nt};
  CHECK_THROWS_AS(run_test(req), Error);
}

TEST_CASE("flags for low counts, repair and non-pure noise") {
  NoisyTable nt;
  nt.table = RealTable{2, 2, {-3, 20, 25, 40}};
  nt.n0_declared = 80;
  nt.provenance.noise = NoiseSpec::gaussian(5.0, 1.0);
  const TestResult r = run_test(independence(nt, StatisticKind::LR, 200, 1));
  CHECK(r.has_flag("low_count_warning"));
  CHECK(r.has_flag("clamped"));
  CHECK(r.has_flag("non_pure_dp"));
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
}

TEST_CASE("declared size drives kappa, not the noisy sum") {
  NoisyTable nt = perturb_table(builtin_fixture("election"), NoiseSpec::laplace(0.2), 5);
  const NullSamplerConfig cfg = null_config(independence(nt, StatisticKind::Chi2, 10, 1));
  CHECK(cfg.n0 == 1000.0);
  CHECK(cfg.noise.scale == doctest::Approx(10.0));
  CHECK(classical_df(independence(nt, StatisticKind::Chi2, 10, 1)) == 1);
}
