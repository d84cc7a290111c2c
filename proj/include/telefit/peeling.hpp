#ifndef TELEFIT_PEELING_HPP
#define TELEFIT_PEELING_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "telefit/dataio.hpp"
#include "telefit/sampler.hpp"

namespace telefit {

/// One rung of the peeling ladder. Depth 0 holds the original data; depth j
/// holds y - sum of the j subtracted leading modes.
struct PeelLevel {
  int depth = 0;
  CorrelatorDataset dataset;
  std::optional<std::pair<double, double>> subtracted_mode;  // (A-hat, E-hat)
  double variance_inflation = 1.0;                            // sigma factor applied at this step
};

/// y*_t = y_t - a_hat exp(-e_hat t), sigma*_t = inflation * sigma_t. Negative
/// residuals are kept. Requires 0 <= a_hat < 1, e_hat > 0, inflation >= 1.
PeelLevel subtract_mode(const PeelLevel& level, double a_hat, double e_hat, double inflation);

/// Adds every subtracted mode back and undoes the inflation, walking the chain
/// from its last level to depth 0.
CorrelatorDataset reconstruct_original(const std::vector<PeelLevel>& chain);

/// Leading run of points (ascending t) whose value exceeds noise_floor * sigma.
std::vector<CorrelatorPoint> usable_points(const CorrelatorDataset& data, double noise_floor);

enum class PointEstimate { Mode, Mean };

struct PeelOptions {
  double inflation = 2.0;
  PointEstimate estimate = PointEstimate::Mode;
  double noise_floor = 3.0;
  FitOptions fit;
};

/// Leading (A, E) of one level. At depth j it estimates (A_{j+1}, E_{j+1}) of
/// the original series.
struct ModeEstimate {
  int depth = 0;
  double amplitude = 0.0;
  double energy = 0.0;
};

struct PeelResult {
  std::vector<PeelLevel> levels;
  std::vector<FitReport> reports;  // one per fitted level
  std::vector<ModeEstimate> estimates;
  bool stopped_early = false;
  std::string diagnostic;
};

/// Fits a single level: restricts it to its usable points, re-selects a k = 2
/// schedule with the ratio rule and runs phase3. Returns nullopt when fewer
/// than two usable points remain.
std::optional<FitReport> fit_level(const PeelLevel& level, const PriorSpec& priors, const McmcConfig& cfg,
                                   const PeelOptions& options);

/// Fits depth 0, then subtracts its leading mode and fits again, `depth` times.
/// The A_2 draws of each level replace the A_1 prior of the next one. Stops
/// early, keeping the partial chain, when a residual level has no usable
/// signal above the noise floor.
PeelResult peel_sequence(const CorrelatorDataset& data, int depth, const PriorSpec& priors, const McmcConfig& cfg,
                         const PeelOptions& options = {});

}  // namespace telefit

#endif  // TELEFIT_PEELING_HPP
