#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpht/error.hpp"
#include "dpht/evalharness.hpp"
#include "dpht/rng.hpp"
#include "dpht/stats.hpp"

using namespace dpht;

namespace {

const RealTable kElection{2, 2, {238, 262, 265, 235}};
const RealTable kFig1b{2, 2, {227.85, 279.24, 253.11, 221.42}};

/// Regularized upper incomplete gamma Q(a, x) in long double: power series for
/// x < a + 1, Lentz continued fraction otherwise.
long double upper_gamma_q(long double a, long double x) {
  if (x <= 0) return 1.0L;
  const long double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1) {
    long double term = 1.0L / a, sum = term, ap = a;
    for (int n = 0; n < 100000; ++n) {
      ap += 1;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-19L) break;
    }
    return 1.0L - sum * std::exp(log_prefix);
  }
  const long double tiny = 1e-4000L;
  long double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    const long double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    const long double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1) < 1e-19L) break;
  }
  return std::exp(log_prefix) * h;
}

}  // namespace

TEST_CASE("election chi-squared and likelihood ratio") {
  const auto chi = chi2_independence(kElection);
  CHECK(std::fabs(chi.stat.value - 2.916) < 0.001);
  CHECK(std::fabs(chi.stat.value - 2.91610) < 1e-5);
  const auto lr = lr_independence(kElection);
  CHECK(lr.stat.value == doctest::Approx(2.9175241183931533).epsilon(1e-12));
  CHECK(std::fabs(lr.stat.value - 2.918) < 0.001);
  CHECK(chi.expected.at(0, 0) == doctest::Approx(251.5));
  CHECK(chi.expected.at(1, 1) == doctest::Approx(248.5));
}

TEST_CASE("two sparse tables from the worked example") {
  CHECK(chi2_independence(RealTable{2, 2, {1, 0, 0, 999}}).stat.value == doctest::Approx(1000.0).epsilon(1e-12));
  // n (ad - bc)^2 / (r1 r2 c1 c2) = 998000 / 1998; the printed 499.5 is this value rounded
  const double second = chi2_independence(RealTable{2, 2, {1, 1, 0, 998}}).stat.value;
  CHECK(second == doctest::Approx(998000.0 / 1998.0).epsilon(1e-12));
  CHECK(std::fabs(second - 499.5) < 0.05);
}

TEST_CASE("noisy election table likelihood ratio") {
  const auto lr = lr_independence(kFig1b);
  CHECK(std::fabs(lr.stat.value - 6.939) < 0.001);
  CHECK(lr.stat.value == doctest::Approx(6.93948).epsilon(1e-5));
}

TEST_CASE("classical chi-squared survival values") {
  CHECK(std::fabs(classical_pvalue_chi2(2.918, 1) - 0.0876) < 0.0005);
  CHECK(std::fabs(classical_pvalue_chi2(6.939, 1) - 0.0084) < 0.0005);
  CHECK(classical_pvalue_chi2(2.918, 1) == doctest::Approx(0.08759637406487947).epsilon(1e-10));
  CHECK(classical_pvalue_chi2(6.939, 1) == doctest::Approx(0.008433624917636965).epsilon(1e-10));
  CHECK(classical_pvalue_chi2(10, 3) == doctest::Approx(0.01856613546304325).epsilon(1e-10));
  CHECK(classical_pvalue_chi2(0.5, 5) == doctest::Approx(0.9921232932326296).epsilon(1e-10));
  CHECK(classical_pvalue_chi2(50, 20) == doctest::Approx(0.0002214766382487835).epsilon(1e-9));
  for (int k = 1; k <= 10; ++k) CHECK(classical_pvalue_chi2(0.0, k) == 1.0);
}

TEST_CASE("classical survival matches a series and continued fraction reference") {
  for (int df = 1; df <= 20; ++df) {
    double prev = 1.0;
    for (double x = 0.0; x <= 100.0; x += 0.25) {
      const double got = classical_pvalue_chi2(x, df);
      const double want = static_cast<double>(upper_gamma_q(df / 2.0L, x / 2.0L));
      INFO("df=" << df << " x=" << x);
      REQUIRE(std::fabs(got - want) < 1e-8);
      REQUIRE(got <= prev);
      prev = got;
    }
  }
}

TEST_CASE("degrees of freedom") {
  CHECK(df_gof(4) == 3);
  CHECK(df_independence(2, 2) == 1);
  CHECK(df_independence(4, 3) == 6);
}

TEST_CASE("proportional rows give zero") {
  const RealTable t{2, 3, {1, 2, 3, 10, 20, 30}};
  CHECK(chi2_independence(t).stat.value == doctest::Approx(0.0).scale(1));
  CHECK(std::fabs(lr_independence(t).stat.value) < 1e-12);
  CHECK(diff_statistic(t) < 1e-12);
}

TEST_CASE("goodness of fit") {
  const std::vector<double> theta{0.4886148, 0.5113852};
  const double n = 787;
  std::vector<double> exact{n * theta[0], n * theta[1]};
  CHECK(chi2_gof(exact, theta, n).value == doctest::Approx(0.0).scale(1));
  CHECK(std::fabs(lr_gof(exact, theta, n).value) < 1e-12);
  std::vector<double> shifted{exact[0] + 10, exact[1] - 10};
  CHECK(chi2_gof(shifted, theta, n).value == doctest::Approx(0.508522876792202).epsilon(1e-12));
  std::vector<double> negative{-1, n + 1};
  const double v = chi2_gof(negative, theta, n).value;
  CHECK(std::isfinite(v));
  CHECK(v >= 0);
  std::vector<double> clamped{-3, n + 3};
  const StatValue lr = lr_gof(clamped, theta, n, StatOptions{kClampDelta, 2.0});
  CHECK(std::isfinite(lr.value));
  CHECK(lr.value >= 0);
  CHECK(lr.clamped);
  CHECK(lr.low_count_warning);
  CHECK_THROWS_AS(chi2_gof(exact, std::vector<double>{1.0, 0.0}, n), Error);
}

TEST_CASE("lr_gof equals the classical form on integer tables summing to n") {
  const std::vector<double> theta{0.2, 0.3, 0.5};
  const std::vector<double> counts{25, 25, 50};
  double classical = 0.0;
  for (int j = 0; j < 3; ++j) classical += 2 * counts[j] * std::log(counts[j] / (100 * theta[j]));
  CHECK(lr_gof(counts, theta, 100).value == doctest::Approx(classical).epsilon(1e-12));
}

TEST_CASE("proportions statistics") {
  const std::vector<double> tv{30, 70}, sv{70, 130};
  CHECK(chi2_proportions(tv, sv, 100, 200).value == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(lr_proportions(tv, sv, 100, 200).value == doctest::Approx(0.756984952055956).epsilon(1e-12));
  CHECK(chi2_proportions(sv, tv, 200, 100).value == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(lr_proportions(sv, tv, 200, 100).value == doctest::Approx(0.756984952055956).epsilon(1e-12));
  const std::vector<double> a{20, 80}, b{40, 160};
  CHECK(chi2_proportions(a, b, 100, 200).value == doctest::Approx(0.0).scale(1));
  CHECK(std::fabs(lr_proportions(a, b, 100, 200).value) < 1e-12);
  const auto pooled = expected_proportions(tv, sv, 100, 200);
  CHECK(pooled.e1[0] == doctest::Approx(100.0 / 3.0));
  CHECK(pooled.e2[1] == doctest::Approx(400.0 / 3.0));
  CHECK_THROWS_AS(chi2_proportions(std::vector<double>{-5, 10}, std::vector<double>{-5, 10}, 10, 10), Error);
}

TEST_CASE("LL statistic") {
  CHECK(ll_statistic(CountTable(1, 1, {7})) == doctest::Approx(0.0).scale(1));
  CHECK(ll_statistic(CountTable::from_rows({{1, 0}, {0, 1}})) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(ll_statistic(builtin_fixture("election")) == doctest::Approx(4.443099229732979).epsilon(1e-10));
  CHECK(ll_statistic(CountTable::from_rows({{265, 235}, {238, 262}})) ==
        doctest::Approx(ll_statistic(builtin_fixture("election"))));
  const StatValue noisy = ll_statistic_noisy(RealTable{2, 2, {1.2, -0.7, 0.4, 0.6}});
  CHECK(noisy.clamped);
  CHECK(noisy.value == doctest::Approx(0.6931471805599453));
}

TEST_CASE("Diff statistic") {
  CHECK(diff_statistic(kElection) == doctest::Approx(54.0).epsilon(1e-12));
  RealTable scaled = kElection;
  for (auto& v : scaled.values) v *= 3;
  CHECK(diff_statistic(scaled) == doctest::Approx(162.0).epsilon(1e-12));
  CHECK_THROWS_AS(diff_statistic(RealTable{2, 2, {0, 0, 0, 0}}), Error);
}

TEST_CASE("degenerate margins are rejected") {
  try {
    chi2_independence(RealTable{2, 2, {-5, 2, 3, 4}});
    FAIL("expected DegenerateMargins");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateMargins);
  }
}

TEST_CASE("scale equivariance and lr_modified identity on random noisy tables") {
  Stream rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t r = 2 + rng.below(3), c = 2 + rng.below(3);
    RealTable t{r, c, std::vector<double>(r * c)};
    for (auto& v : t.values) v = 50.0 + 100.0 * rng.uniform() + rng.laplace(10.0);
    const auto chi = chi2_independence(t);
    const auto lr = lr_independence(t);
    REQUIRE(chi.stat.value >= 0);
    REQUIRE(lr.stat.value >= -1e-9);
    const auto mod = lr_modified(t.values, chi.expected.values);
    REQUIRE(mod.value == doctest::Approx(lr.stat.value).epsilon(1e-9).scale(1));

    RealTable big = t;
    const double k = 1.0 + 9.0 * rng.uniform();
    for (auto& v : big.values) v *= k;
    REQUIRE(chi2_independence(big).stat.value == doctest::Approx(k * chi.stat.value).epsilon(1e-9));
  }
}

TEST_CASE("low count warning follows the rule of thumb") {
  const std::vector<double> cells{40, 40, 40};
  CHECK_FALSE(low_count_warning(cells, 10.0));
  CHECK(low_count_warning(cells, 12.0));
  CHECK(low_count_warning(std::vector<double>{4.9, 100}, 0.0));
  const auto flagged = chi2_independence(RealTable{2, 2, {30, 40, 50, 60}}, StatOptions{kClampDelta, 10.0});
  CHECK(flagged.stat.low_count_warning);
}

TEST_CASE("statistic names round trip") {
  for (auto k : {StatisticKind::Chi2, StatisticKind::LR, StatisticKind::LRModified, StatisticKind::LL,
                 StatisticKind::Diff})
    CHECK(parse_statistic(statistic_name(k)) == k);
  CHECK_THROWS_AS(parse_statistic("bogus"), Error);
}
