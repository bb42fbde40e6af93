#pragma once

#include <span>
#include <vector>

#include "dpht/noise.hpp"
#include "dpht/rng.hpp"
#include "dpht/stats.hpp"
#include "dpht/tables.hpp"

namespace dpht {

enum class TestKind { GoodnessOfFit, Proportions, Independence };

std::string test_name(TestKind kind);
TestKind parse_test(const std::string& name);

/// How GOF reference statistics are drawn: exact Multinomial(n0, theta0) plus
/// fresh noise, or the Gaussian limit sum (A + kappa V*)^2 / theta0.
enum class GofMethod { ExactMultinomial, GaussianLimit };

/// Estimated null probabilities plus whether the clamp/renormalise repair fired.
struct ThetaEstimate {
  Theta theta;
  bool repaired = false;
};

struct NullSamplerConfig {
  TestKind test = TestKind::Independence;
  StatisticKind statistic = StatisticKind::Chi2;
  Theta theta0;
  /// Table size for GOF / independence (kappa = 1/sqrt(n0)).
  double n0 = 0.0;
  /// Sample sizes for proportions (kappa_k = 1/sqrt(n_k)).
  double n1 = 0.0;
  double n2 = 0.0;
  /// Fresh-noise family and scale; must match the release's provenance.
  NoiseSpec noise;
  /// Fresh noise for the second table of a proportions test.
  NoiseSpec noise2;
  GofMethod gof_method = GofMethod::ExactMultinomial;
  double clamp_delta = kClampDelta;
};

/// One draw of A ~ N(0, diag(theta) - theta theta^T), computed as
/// diag(s)(z - s (s^T z)) with s = sqrt(theta).
std::vector<double> sample_multinomial_gaussian(std::span<const double> theta, Stream& rng);
void sample_multinomial_gaussian(std::span<const double> theta, Stream& rng, std::span<double> out);

/// Clamp entries below delta up to delta and renormalise to sum 1.
ThetaEstimate repair_theta(std::size_t rows, std::size_t cols, std::vector<double> raw, double delta = kClampDelta);

/// theta0[i,j] = T[i,.] T[.,j] / T[.,.]^2 from the noisy table.
ThetaEstimate estimate_theta_independence(const NoisyTable& nt, double delta = kClampDelta);

/// theta0[j] = (T[j] + S[j]) / (n1 + n2), repaired.
ThetaEstimate estimate_theta_proportions(const NoisyTable& nt, const NoisyTable& ns, double n1, double n2,
                                         double delta = kClampDelta);

double sample_independence_null(const NullSamplerConfig& cfg, Stream& rng);
double sample_proportions_null(const NullSamplerConfig& cfg, Stream& rng);
double sample_gof_null(const NullSamplerConfig& cfg, Stream& rng);

/// Convenience overload matching the GOF recipe's inputs directly.
double sample_gof_null(const Theta& theta0, std::int64_t n0, const NoiseSpec& spec, StatisticKind stat, Stream& rng,
                       GofMethod method = GofMethod::ExactMultinomial);

/// Dispatches on cfg.test.
double sample_null(const NullSamplerConfig& cfg, Stream& rng);

/// Validates a config before sampling (theta simplex and positivity, kappa > 0).
void validate_config(const NullSamplerConfig& cfg);

}  // namespace dpht
