#include "telefit/peeling.hpp"

#include <cmath>

#include "telefit/error.hpp"

namespace telefit {

PeelLevel subtract_mode(const PeelLevel& level, double a_hat, double e_hat, double inflation) {
  if (!(inflation >= 1.0)) throw InvalidArgument("variance inflation must be >= 1");
  if (!(a_hat >= 0.0 && a_hat < 1.0)) throw InvalidArgument("subtracted amplitude must lie in [0,1)");
  if (!(e_hat > 0.0)) throw InvalidArgument("subtracted energy must be positive");

  PeelLevel next;
  next.depth = level.depth + 1;
  next.subtracted_mode = std::make_pair(a_hat, e_hat);
  next.variance_inflation = inflation;
  next.dataset = level.dataset;
  for (auto& p : next.dataset.points) {
    p.y -= a_hat * std::exp(-e_hat * p.t);
    p.sigma *= inflation;
  }
  next.dataset.provenance["peel_depth"] = std::to_string(next.depth);
  next.dataset.provenance["peel_subtracted_" + std::to_string(next.depth)] =
      format_double(a_hat) + "*exp(-" + format_double(e_hat) + "*t)";
  next.dataset.provenance["peel_inflation_" + std::to_string(next.depth)] = format_double(inflation);
  return next;
}

CorrelatorDataset reconstruct_original(const std::vector<PeelLevel>& chain) {
  if (chain.empty()) throw InvalidArgument("empty peel chain");
  CorrelatorDataset data = chain.back().dataset;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (!it->subtracted_mode) continue;
    const auto [a, e] = *it->subtracted_mode;
    for (auto& p : data.points) {
      p.y += a * std::exp(-e * p.t);
      p.sigma /= it->variance_inflation;
    }
  }
  return data;
}

std::vector<CorrelatorPoint> usable_points(const CorrelatorDataset& data, double noise_floor) {
  std::vector<CorrelatorPoint> out;
  for (const auto& p : data.points) {
    if (!(p.y > noise_floor * p.sigma)) break;
    out.push_back(p);
  }
  return out;
}

std::optional<FitReport> fit_level(const PeelLevel& level, const PriorSpec& priors, const McmcConfig& cfg,
                                   const PeelOptions& options) {
  CorrelatorDataset usable;
  usable.points = usable_points(level.dataset, options.noise_floor);
  usable.rho12 = level.dataset.rho12;
  if (usable.points.size() < 2) return std::nullopt;
  const TelescopeSchedule schedule = select_times(usable.points, 2, TruncationRule::Ratio);
  return phase3(usable, schedule, priors, cfg, options.fit);
}

PeelResult peel_sequence(const CorrelatorDataset& data, int depth, const PriorSpec& priors, const McmcConfig& cfg,
                         const PeelOptions& options) {
  if (depth < 1) throw InvalidArgument("peel depth must be at least 1");
  if (!(options.inflation >= 1.0)) throw InvalidArgument("variance inflation must be >= 1");
  data.validate();

  PeelResult result;
  result.levels.push_back(PeelLevel{0, data, std::nullopt, 1.0});
  PeelOptions level_options = options;

  for (int j = 0; j <= depth; ++j) {
    McmcConfig level_cfg = cfg;
    if (j > 0) level_cfg.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(j)});
    auto report = fit_level(result.levels.back(), priors, level_cfg, level_options);
    if (!report) {
      result.stopped_early = true;
      result.diagnostic = "residual below noise floor at depth " + std::to_string(j) +
                          ": fewer than two points exceed " + format_double(options.noise_floor) + " sigma";
      break;
    }
    const bool use_mode = options.estimate == PointEstimate::Mode;
    const double a_hat = use_mode ? report->summary(Parameter::A1).mode : report->summary(Parameter::A1).mean;
    const double e_hat = use_mode ? report->summary(Parameter::E1).mode : report->summary(Parameter::E1).mean;
    result.estimates.push_back({j, a_hat, e_hat});
    level_options.fit.a1_seed.particles = report->column(Parameter::A2);
    result.reports.push_back(std::move(*report));
    if (j == depth) break;
    result.levels.push_back(subtract_mode(result.levels.back(), a_hat, e_hat, options.inflation));
  }
  return result;
}

}  // namespace telefit
