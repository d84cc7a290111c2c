#ifndef TELEFIT_MODEL_HPP
#define TELEFIT_MODEL_HPP

#include <span>
#include <string_view>
#include <vector>

namespace telefit {

/// Truncated exponential-sum parameters with equally spaced energies
/// E_n = E_1 + (n-1) c.
struct ExpSumParams {
  std::vector<double> amplitudes;  // A_1..A_k, each in (0,1)
  double base_energy = 0.0;        // E_1 > 0
  double spacing = 0.0;            // c > 0

  /// Throws InvalidArgument when any invariant is violated.
  void validate() const;

  std::size_t order() const { return amplitudes.size(); }

  /// Energy of the n-th mode, 1-based.
  double energy(std::size_t n) const { return base_energy + static_cast<double>(n - 1) * spacing; }

  bool operator==(const ExpSumParams&) const = default;
};

/// One observed correlator value.
struct CorrelatorPoint {
  int t = 0;
  double y = 0.0;
  double sigma = 1.0;

  bool operator==(const CorrelatorPoint&) const = default;
};

enum class TruncationRule { Ratio, Tolerance, Manual };

std::string_view to_string(TruncationRule rule);
TruncationRule truncation_rule_from_string(std::string_view name);

/// Truncation times t_1 > t_2 > ... > t_k at which modes beyond the j-th are negligible.
struct TelescopeSchedule {
  std::vector<int> times;
  TruncationRule rule = TruncationRule::Ratio;
  double provisional_spacing = 0.0;  // used by TruncationRule::Tolerance only
  double tolerance = 1e-6;           // likewise

  std::size_t order() const { return times.size(); }

  bool operator==(const TelescopeSchedule&) const = default;
};

/// G(t) = exp(-E_1 t) * sum_n A_n exp(-(n-1) c t), summed in ascending n.
double eval_correlator(const ExpSumParams& params, int t);

/// Row j of the telescoped system: G(t_j) keeping only the first j amplitudes.
std::vector<double> telescoped_values(const ExpSumParams& params, const TelescopeSchedule& schedule);

/// Contribution of modes j+1..k at time t, i.e. the error of truncating after j terms.
double annihilation_residual(const ExpSumParams& params, int t, int j);

/// Picks k truncation times from the available points.
///
/// Ratio: t_1 is the largest time and t_j = round(t_1 / j), snapped to the nearest
/// available time with ties going to the larger one.
///
/// Tolerance: t_1 is the largest time; for j >= 2, t_j is the smallest available
/// time at which exp(-j c0 t) < tol, i.e. where the first dropped term is negligible
/// relative to the leading one for unit amplitudes. Falls back to the Ratio value
/// when no time qualifies or the result would not be strictly decreasing.
TelescopeSchedule select_times(std::span<const CorrelatorPoint> points, int k,
                               TruncationRule rule = TruncationRule::Ratio,
                               double c0 = 0.0, double tol = 1e-6);

/// User-supplied truncation times; they must be strictly decreasing and present in `points`.
TelescopeSchedule manual_schedule(std::span<const CorrelatorPoint> points, std::vector<int> times);

}  // namespace telefit

#endif  // TELEFIT_MODEL_HPP
