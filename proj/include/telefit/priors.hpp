#ifndef TELEFIT_PRIORS_HPP
#define TELEFIT_PRIORS_HPP

#include <optional>
#include <variant>
#include <vector>

#include "telefit/random.hpp"

namespace telefit {

/// Gamma with shape `shape` (lambda) and scale `scale` (eta); mean = shape * scale.
struct GammaPrior {
  double scale = 1.0;
  double shape = 1.0;
  bool operator==(const GammaPrior&) const = default;
};

/// Pareto with density shape * x_min^shape / x^(shape+1) on [x_min, inf).
struct ParetoPrior {
  double x_min = 0.01;
  double shape = 1.5;
  bool operator==(const ParetoPrior&) const = default;
};

using EnergyPrior = std::variant<GammaPrior, ParetoPrior>;

/// Hyperparameters of the joint prior:
///   A_n ~ Beta(alpha, beta) independently,
///   E_1 ~ Gamma or Pareto,
///   c | E_1 ~ Uniform(0, omega / E_1).
struct PriorSpec {
  double alpha = 1.0;
  double beta = 1.0;
  EnergyPrior energy = GammaPrior{};
  double omega = 1.0;

  void validate() const;
  bool operator==(const PriorSpec&) const = default;
};

double sample_amplitude(const PriorSpec& spec, Rng& rng);
double sample_energy(const PriorSpec& spec, Rng& rng);
double sample_spacing(const PriorSpec& spec, double e1, Rng& rng);

// Component log-densities; -infinity outside the support.
double log_amplitude_density(const PriorSpec& spec, double a);
double log_energy_density(const PriorSpec& spec, double e1);
double log_spacing_density(const PriorSpec& spec, double e1, double c);

/// Any subset of the model parameters. `spacing` requires `base_energy`.
struct PartialParams {
  std::vector<double> amplitudes;
  std::optional<double> base_energy;
  std::optional<double> spacing;
};

/// Sum of the component log-densities of the supplied parameters.
double log_prior_density(const PriorSpec& spec, const PartialParams& params);

/// Prior mean of E_1 (infinite for Pareto shape <= 1).
double energy_prior_mean(const PriorSpec& spec);

}  // namespace telefit

#endif  // TELEFIT_PRIORS_HPP
