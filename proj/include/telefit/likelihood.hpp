#ifndef TELEFIT_LIKELIHOOD_HPP
#define TELEFIT_LIKELIHOOD_HPP

namespace telefit {

/// Observations at the first two truncation times, t1 > t2.
struct ObservationPair {
  double y1 = 0.0;
  double y2 = 0.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho12 = 0.0;
  int t1 = 1;
  int t2 = 0;

  /// Throws InvalidArgument unless sigmas > 0, |rho| < 1 and t1 > t2.
  void validate() const;
  bool operator==(const ObservationPair&) const = default;
};

// The marginal and conditional terms drop their normalizing constants; they
// cancel in Metropolis-Hastings ratios.

/// -(y1 - a1 exp(-e1 t1))^2 / (2 sigma1^2)
double log_lik_marginal(double a1, double e1, double y1, double sigma1, int t1);

/// Gaussian exponent of y2 given y1, with conditional mean
/// G(t2) + rho (sigma2/sigma1) (y1 - G(t1)) and variance sigma2^2 (1 - rho^2).
double log_lik_conditional(double a1, double e1, double a2, double c, const ObservationPair& obs);

/// Full bivariate normal log-density of (y1, y2), normalizing constant included.
/// Throws InvalidArgument when |rho| >= 1.
double log_lik_joint(double a1, double e1, double a2, double c, const ObservationPair& obs);

}  // namespace telefit

#endif  // TELEFIT_LIKELIHOOD_HPP
