#include "dpht/noise.hpp"

#include <cmath>
#include <numbers>

#include "dpht/error.hpp"

namespace dpht {

NoiseSpec NoiseSpec::identity() { return NoiseSpec{}; }

NoiseSpec NoiseSpec::laplace(double epsilon, double sensitivity) {
  if (!(sensitivity > 0.0)) throw Error(ErrorCode::NonPositiveSensitivity, "sensitivity must be > 0");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be > 0");
  NoiseSpec spec;
  spec.family = NoiseFamily::Laplace;
  spec.epsilon = epsilon;
  spec.sensitivity = sensitivity;
  spec.scale = std::isinf(epsilon) ? 0.0 : laplace_scale(epsilon, sensitivity);
  spec.pure_dp = true;
  return spec;
}

NoiseSpec NoiseSpec::gaussian(double sigma, double epsilon, double sensitivity) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  NoiseSpec spec;
  spec.family = NoiseFamily::Gaussian;
  spec.scale = sigma;
  spec.epsilon = epsilon;
  spec.sensitivity = sensitivity;
  spec.pure_dp = false;
  return spec;
}

NoiseSpec NoiseSpec::from_custom(CustomNoise noise) {
  if (!noise.sample) throw Error(ErrorCode::InvalidArgument, "custom noise needs a sampler");
  if (!(noise.std_dev >= 0.0)) throw Error(ErrorCode::InvalidArgument, "custom noise std_dev must be >= 0");
  NoiseSpec spec;
  spec.family = NoiseFamily::Custom;
  spec.scale = noise.std_dev;
  spec.pure_dp = false;
  spec.custom = std::make_shared<const CustomNoise>(std::move(noise));
  return spec;
}

bool NoiseSpec::is_identity() const { return family != NoiseFamily::Custom && scale == 0.0; }

double NoiseSpec::std_dev() const {
  switch (family) {
    case NoiseFamily::Laplace: return scale * std::numbers::sqrt2;
    case NoiseFamily::Gaussian: return scale;
    case NoiseFamily::Custom: return custom ? custom->std_dev : 0.0;
  }
  return 0.0;
}

double NoiseSpec::draw(Stream& rng) const {
  switch (family) {
    case NoiseFamily::Laplace: return rng.laplace(scale);
    case NoiseFamily::Gaussian: return scale == 0.0 ? 0.0 : scale * rng.normal();
    case NoiseFamily::Custom: return custom->sample(rng);
  }
  return 0.0;
}

std::string family_name(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Laplace: return "laplace";
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::Custom: return "custom";
  }
  return "unknown";
}

double laplace_scale(double epsilon, double sensitivity) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be > 0");
  if (!(sensitivity > 0.0)) throw Error(ErrorCode::NonPositiveSensitivity, "sensitivity must be > 0");
  return sensitivity / epsilon;
}

std::vector<double> sample_noise_vector(const NoiseSpec& spec, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "noise vector needs count >= 1");
  Stream rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = spec.draw(rng);
  return out;
}

NoisyTable perturb_table(const CountTable& t, const NoiseSpec& spec, Stream& rng, std::uint64_t seed_for_record) {
  NoisyTable out;
  out.table = to_real(t);
  out.n0_declared = t.total();
  out.provenance.noise = spec;
  out.provenance.seed = seed_for_record;
  for (auto& v : out.table.values) v += spec.draw(rng);
  return out;
}

NoisyTable perturb_table(const CountTable& t, const NoiseSpec& spec, std::uint64_t seed) {
  Stream rng(seed);
  return perturb_table(t, spec, rng, seed);
}

}  // namespace dpht
