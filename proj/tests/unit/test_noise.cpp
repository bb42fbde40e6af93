#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dpht/error.hpp"
#include "dpht/evalharness.hpp"
#include "dpht/noise.hpp"

using namespace dpht;

TEST_CASE("laplace scale from epsilon and sensitivity") {
  CHECK(laplace_scale(0.2, 2) == doctest::Approx(10.0));
  CHECK(laplace_scale(1, 1) == 1.0);
  CHECK(laplace_scale(0.0001, 2) == doctest::Approx(20000.0));
  CHECK(NoiseSpec::laplace(0.0001).std_dev() == doctest::Approx(std::sqrt(2.0) * 20000.0).epsilon(1e-12));
  CHECK_THROWS_AS(laplace_scale(0.0, 2), Error);
  CHECK_THROWS_AS(laplace_scale(1.0, -1), Error);
  try {
    laplace_scale(-1, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveEpsilon);
  }
}

TEST_CASE("infinite epsilon is the identity") {
  const NoiseSpec spec = NoiseSpec::laplace(kInfinity);
  CHECK(spec.is_identity());
  const CountTable t = builtin_fixture("election");
  const NoisyTable nt = perturb_table(t, spec, 123);
  for (std::size_t k = 0; k < 4; ++k) CHECK(nt.values()[k] == static_cast<double>(t.counts()[k]));
  CHECK(nt.n0_declared == 1000);
}

TEST_CASE("perturbation is deterministic and leaves the input alone") {
  const CountTable t = builtin_fixture("election");
  const CountTable copy = t;
  const NoiseSpec spec = NoiseSpec::laplace(0.2);
  CHECK(spec.scale == doctest::Approx(10.0));
  const NoisyTable a = perturb_table(t, spec, 77);
  const NoisyTable b = perturb_table(t, spec, 77);
  const NoisyTable c = perturb_table(t, spec, 78);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  CHECK(t == copy);
  CHECK(a.provenance.seed == 77);
  CHECK(a.provenance.noise.pure_dp);
}

TEST_CASE("noise vector moments") {
  const auto v = sample_noise_vector(NoiseSpec::laplace(0.2), 1000000, 5);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  CHECK(std::fabs(mean) < 5.0 * 10.0 / 1000.0);
  CHECK(std::fabs(var / 200.0 - 1.0) < 0.02);
  CHECK_THROWS_AS(sample_noise_vector(NoiseSpec::laplace(1.0), 0, 1), Error);
}

TEST_CASE("gaussian and custom families are not pure DP") {
  const NoiseSpec g = NoiseSpec::gaussian(3.0, 0.5);
  CHECK_FALSE(g.pure_dp);
  CHECK(g.std_dev() == 3.0);
  CustomNoise zero{"point_mass", [](Stream&) { return 0.0; }, 0.0};
  const NoiseSpec c = NoiseSpec::from_custom(zero);
  CHECK_FALSE(c.pure_dp);
  for (double x : sample_noise_vector(c, 1000, 9)) CHECK(x == 0.0);
}
