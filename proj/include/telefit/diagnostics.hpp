#ifndef TELEFIT_DIAGNOSTICS_HPP
#define TELEFIT_DIAGNOSTICS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "telefit/priors.hpp"

namespace telefit {

/// Point and interval summary of a set of posterior draws.
struct PosteriorSummary {
  double mode = 0.0;       // midpoint of the most populated histogram bin
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double bin_width = 0.0;  // zero when all draws coincide
  bool degenerate = false;

  bool operator==(const PosteriorSummary&) const = default;
};

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

/// Equal-width histogram over [min, max]; the maximum lands in the last bin.
std::vector<HistogramBin> histogram(std::span<const double> draws, int bins);

/// Requires at least 10 draws, bins >= 2 and 0 < ci_level < 1. The mode is the
/// midpoint of the fullest bin (ties go to the lower bin); the interval bounds
/// are the empirical (1 -/+ ci_level)/2 quantiles, taken as order statistics.
PosteriorSummary summarize(std::span<const double> draws, int bins = 50, double ci_level = 0.95);

/// Same as summarize() without the minimum-draw-count check; needs one draw.
PosteriorSummary summarize_any(std::span<const double> draws, int bins = 50, double ci_level = 0.95);

/// Writes `bin_left,bin_right,count` rows.
void write_histogram_csv(std::ostream& os, std::span<const HistogramBin> bins);

}  // namespace telefit

#endif  // TELEFIT_DIAGNOSTICS_HPP
