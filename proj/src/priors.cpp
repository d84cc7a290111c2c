#include "telefit/priors.hpp"

#include <cmath>
#include <limits>

#include "telefit/error.hpp"

namespace telefit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

double sample_gamma(double shape, double scale, Rng& rng) {
  std::gamma_distribution<double> g(shape, scale);
  return g(rng);
}

}  // namespace

void PriorSpec::validate() const {
  if (!positive(alpha) || !positive(beta)) throw InvalidArgument("beta hyperparameters must be positive");
  if (!positive(omega)) throw InvalidArgument("omega must be positive");
  if (const auto* g = std::get_if<GammaPrior>(&energy)) {
    if (!positive(g->scale) || !positive(g->shape))
      throw InvalidArgument("gamma hyperparameters must be positive");
  } else {
    const auto& p = std::get<ParetoPrior>(energy);
    if (!positive(p.x_min) || !positive(p.shape))
      throw InvalidArgument("Pareto hyperparameters must be positive");
  }
}

double sample_amplitude(const PriorSpec& spec, Rng& rng) {
  // Beta(a,b) = X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b); reject the measure-zero endpoints
  for (;;) {
    const double x = sample_gamma(spec.alpha, 1.0, rng);
    const double y = sample_gamma(spec.beta, 1.0, rng);
    const double a = x / (x + y);
    if (a > 0.0 && a < 1.0) return a;
  }
}

double sample_energy(const PriorSpec& spec, Rng& rng) {
  if (const auto* g = std::get_if<GammaPrior>(&spec.energy)) {
    for (;;) {
      const double e = sample_gamma(g->shape, g->scale, rng);
      if (e > 0.0) return e;
    }
  }
  const auto& p = std::get<ParetoPrior>(spec.energy);
  return p.x_min * std::pow(uniform_open(rng), -1.0 / p.shape);
}

double sample_spacing(const PriorSpec& spec, double e1, Rng& rng) {
  if (!(e1 > 0.0)) throw InvalidArgument("spacing prior needs E1 > 0");
  return uniform_open(rng) * spec.omega / e1;
}

double log_amplitude_density(const PriorSpec& spec, double a) {
  if (!(a > 0.0 && a < 1.0)) return kNegInf;
  const double log_beta_fn =
      std::lgamma(spec.alpha) + std::lgamma(spec.beta) - std::lgamma(spec.alpha + spec.beta);
  return (spec.alpha - 1.0) * std::log(a) + (spec.beta - 1.0) * std::log1p(-a) - log_beta_fn;
}

double log_energy_density(const PriorSpec& spec, double e1) {
  if (!(e1 > 0.0) || !std::isfinite(e1)) return kNegInf;
  if (const auto* g = std::get_if<GammaPrior>(&spec.energy)) {
    return (g->shape - 1.0) * std::log(e1) - e1 / g->scale - std::lgamma(g->shape) -
           g->shape * std::log(g->scale);
  }
  const auto& p = std::get<ParetoPrior>(spec.energy);
  if (e1 < p.x_min) return kNegInf;
  return std::log(p.shape) + p.shape * std::log(p.x_min) - (p.shape + 1.0) * std::log(e1);
}

double log_spacing_density(const PriorSpec& spec, double e1, double c) {
  if (!(e1 > 0.0)) return kNegInf;
  if (!(c > 0.0 && c < spec.omega / e1)) return kNegInf;
  return std::log(e1 / spec.omega);
}

double log_prior_density(const PriorSpec& spec, const PartialParams& params) {
  double lp = 0.0;
  for (double a : params.amplitudes) lp += log_amplitude_density(spec, a);
  if (params.base_energy) lp += log_energy_density(spec, *params.base_energy);
  if (params.spacing) {
    if (!params.base_energy) throw InvalidArgument("the spacing prior is conditional on E1");
    lp += log_spacing_density(spec, *params.base_energy, *params.spacing);
  }
  return std::isnan(lp) ? kNegInf : lp;
}

double energy_prior_mean(const PriorSpec& spec) {
  if (const auto* g = std::get_if<GammaPrior>(&spec.energy)) return g->shape * g->scale;
  const auto& p = std::get<ParetoPrior>(spec.energy);
  return p.shape > 1.0 ? p.shape * p.x_min / (p.shape - 1.0) : std::numeric_limits<double>::infinity();
}

}  // namespace telefit
