#include "telefit/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "telefit/error.hpp"

namespace telefit {

namespace {

double mean1(double a1, double e1, int t1) { return a1 * std::exp(-e1 * t1); }

double mean2(double a1, double e1, double a2, double c, int t2) {
  return std::exp(-e1 * t2) * (a1 + a2 * std::exp(-c * t2));
}

}  // namespace

void ObservationPair::validate() const {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw InvalidArgument("observation sigmas must be positive");
  if (!(std::abs(rho12) < 1.0)) throw InvalidArgument("correlation must satisfy |rho| < 1");
  if (!(t1 > t2)) throw InvalidArgument("observation times must satisfy t1 > t2");
}

double log_lik_marginal(double a1, double e1, double y1, double sigma1, int t1) {
  const double r = y1 - mean1(a1, e1, t1);
  return -(r * r) / (2.0 * sigma1 * sigma1);
}

double log_lik_conditional(double a1, double e1, double a2, double c, const ObservationPair& obs) {
  const double shift = obs.rho12 * (obs.sigma2 / obs.sigma1) * (obs.y1 - mean1(a1, e1, obs.t1));
  const double r = obs.y2 - (mean2(a1, e1, a2, c, obs.t2) + shift);
  const double var = obs.sigma2 * obs.sigma2 * (1.0 - obs.rho12 * obs.rho12);
  return -(r * r) / (2.0 * var);
}

double log_lik_joint(double a1, double e1, double a2, double c, const ObservationPair& obs) {
  if (!(std::abs(obs.rho12) < 1.0)) throw InvalidArgument("singular covariance: |rho| must be < 1");
  const double z1 = (obs.y1 - mean1(a1, e1, obs.t1)) / obs.sigma1;
  const double z2 = (obs.y2 - mean2(a1, e1, a2, c, obs.t2)) / obs.sigma2;
  const double rho = obs.rho12;
  const double one_minus = 1.0 - rho * rho;
  const double quad = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / one_minus;
  return -std::log(2.0 * std::numbers::pi * obs.sigma1 * obs.sigma2 * std::sqrt(one_minus)) - 0.5 * quad;
}

}  // namespace telefit
