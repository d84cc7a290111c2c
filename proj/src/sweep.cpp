#include "telefit/sweep.hpp"

#include <algorithm>
#include <ostream>

#include "telefit/error.hpp"

namespace telefit {

std::size_t SweepTable::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.report; }));
}

SweepTable sensitivity_sweep(const CorrelatorDataset& data, const TelescopeSchedule& schedule,
                             std::span<const PriorSpec> grid, const McmcConfig& cfg, const FitOptions& options) {
  if (grid.empty()) throw InvalidArgument("sensitivity sweep needs a non-empty grid");
  SweepTable table;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepCell cell;
    cell.index = i;
    cell.priors = grid[i];
    cell.seed = sweep_cell_seed(cfg.seed, i);
    McmcConfig cell_cfg = cfg;
    cell_cfg.seed = cell.seed;
    try {
      cell.report = phase3(data, schedule, grid[i], cell_cfg, options);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

void write_sweep_table(std::ostream& os, const SweepTable& table) {
  os << "cell,alpha,beta,omega,energy_family,energy_p1,energy_p2,seed,status";
  for (const char* name : kParameterNames)
    os << ',' << name << "_mode," << name << "_mean," << name << "_ci_low," << name << "_ci_high";
  os << ",discard_fraction,error\n";
  for (const auto& cell : table.cells) {
    const auto& p = cell.priors;
    os << cell.index << ',' << format_double(p.alpha) << ',' << format_double(p.beta) << ','
       << format_double(p.omega) << ',';
    if (const auto* g = std::get_if<GammaPrior>(&p.energy))
      os << "gamma," << format_double(g->scale) << ',' << format_double(g->shape);
    else {
      const auto& pa = std::get<ParetoPrior>(p.energy);
      os << "pareto," << format_double(pa.x_min) << ',' << format_double(pa.shape);
    }
    os << ',' << cell.seed << ',' << (cell.report ? "ok" : "failed");
    for (std::size_t k = 0; k < 4; ++k) {
      if (cell.report) {
        const auto& s = cell.report->summaries[k];
        os << ',' << format_double(s.mode) << ',' << format_double(s.mean) << ',' << format_double(s.ci_low) << ','
           << format_double(s.ci_high);
      } else {
        os << ",,,,";
      }
    }
    os << ',' << (cell.report ? format_double(cell.report->discard_fraction) : "");
    std::string err = cell.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << ',' << err << '\n';
  }
}

}  // namespace telefit
