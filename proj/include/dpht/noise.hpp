#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dpht/rng.hpp"
#include "dpht/tables.hpp"

namespace dpht {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Default sensitivity for releasing a full table: modifying one record moves
/// one unit of count between two cells.
inline constexpr double kTableSensitivity = 2.0;

/// Sensitivity of the identity query under marginal-neighbor privacy.
inline constexpr double kMarginalNeighborSensitivity = 4.0;

enum class NoiseFamily { Laplace, Gaussian, Custom };

/// User-supplied zero-mean, finite-variance noise.
struct CustomNoise {
  std::string name;
  std::function<double(Stream&)> sample;
  double std_dev = 0.0;
};

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Laplace;
  /// Laplace b or Gaussian sigma. Zero means no noise.
  double scale = 0.0;
  double epsilon = kInfinity;
  double sensitivity = kTableSensitivity;
  /// Only Laplace calibrated to (epsilon, sensitivity) is pure epsilon-DP.
  bool pure_dp = true;
  std::shared_ptr<const CustomNoise> custom;

  static NoiseSpec identity();
  /// Laplace(sensitivity / epsilon); epsilon == inf yields the identity.
  static NoiseSpec laplace(double epsilon, double sensitivity = kTableSensitivity);
  /// Experimental: N(0, sigma^2). Never pure DP. epsilon/sensitivity are
  /// recorded for provenance only.
  static NoiseSpec gaussian(double sigma, double epsilon = kInfinity, double sensitivity = kTableSensitivity);
  static NoiseSpec from_custom(CustomNoise noise);

  bool is_identity() const;
  double std_dev() const;
  double draw(Stream& rng) const;
};

std::string family_name(NoiseFamily family);

double laplace_scale(double epsilon, double sensitivity);

enum class PrivacyMode { Standard, MarginalNeighbor };

struct Provenance {
  NoiseSpec noise;
  std::uint64_t seed = 0;
  PrivacyMode mode = PrivacyMode::Standard;
  /// Set when a statistic had to round/clamp the noisy values (LL on noisy input).
  bool rounded = false;
};

/// Privatized table. n0_declared is the public true table size; it is never
/// recomputed from the noisy values.
struct NoisyTable {
  RealTable table;
  std::int64_t n0_declared = 0;
  Provenance provenance;

  std::size_t rows() const { return table.rows; }
  std::size_t cols() const { return table.cols; }
  const std::vector<double>& values() const { return table.values; }
};

std::vector<double> sample_noise_vector(const NoiseSpec& spec, std::size_t count, std::uint64_t seed);

/// values = counts + i.i.d. noise, drawn row-major from Stream(seed).
NoisyTable perturb_table(const CountTable& t, const NoiseSpec& spec, std::uint64_t seed);

/// Same as perturb_table but draws from a caller-owned stream.
NoisyTable perturb_table(const CountTable& t, const NoiseSpec& spec, Stream& rng, std::uint64_t seed_for_record = 0);

}  // namespace dpht
