#ifndef TELEFIT_SWEEP_HPP
#define TELEFIT_SWEEP_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "telefit/dataio.hpp"
#include "telefit/sampler.hpp"

namespace telefit {

struct SweepCell {
  std::size_t index = 0;
  PriorSpec priors;
  std::uint64_t seed = 0;
  std::optional<FitReport> report;
  std::string error;  // set when the fit failed
};

struct SweepTable {
  std::vector<SweepCell> cells;
  std::size_t failures() const;
};

/// Seed of grid cell `index`.
inline std::uint64_t sweep_cell_seed(std::uint64_t base, std::size_t index) {
  return derive_seed(base, {0x5eedULL, static_cast<std::uint64_t>(index)});
}

/// One phase3 fit per prior spec, cell i seeded with sweep_cell_seed(cfg.seed, i).
/// Failed cells keep their error message; the sweep continues.
SweepTable sensitivity_sweep(const CorrelatorDataset& data, const TelescopeSchedule& schedule,
                             std::span<const PriorSpec> grid, const McmcConfig& cfg, const FitOptions& options = {});

/// CSV with one row per cell: hyperparameters, status and per-parameter summaries.
void write_sweep_table(std::ostream& os, const SweepTable& table);

}  // namespace telefit

#endif  // TELEFIT_SWEEP_HPP
