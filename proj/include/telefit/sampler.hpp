#ifndef TELEFIT_SAMPLER_HPP
#define TELEFIT_SAMPLER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "telefit/diagnostics.hpp"
#include "telefit/likelihood.hpp"
#include "telefit/model.hpp"
#include "telefit/priors.hpp"
#include "telefit/random.hpp"

namespace telefit {

struct CorrelatorDataset;

// ---------------------------------------------------------------------------
// Metropolis-Hastings building block

enum class Support {
  Real,      // plain Gaussian random walk
  Unit,      // random walk reflected into (0, 1)
  Positive,  // random walk on log(x), reflected below log(upper)
};

struct Coordinate {
  Support support = Support::Real;
  double scale = 0.1;
  double upper = std::numeric_limits<double>::infinity();  // Positive only
  /// Proposals below the floor are discarded and redrawn, not rejected. The
  /// acceptance ratio carries the matching renormalization of the proposal.
  double floor = -std::numeric_limits<double>::infinity();
};

struct StepResult {
  std::vector<bool> accepted;  // one flag per coordinate
  long discards = 0;           // redrawn proposals below a floor
  long proposals = 0;          // proposals drawn, discards included
};

using LogTarget = std::function<double(std::span<const double>)>;

/// One coordinate-wise Metropolis-Hastings sweep over `state`, in place.
/// A floor that cannot be cleared within 64 redraws leaves that coordinate
/// unchanged for this sweep.
StepResult mh_step(std::span<double> state, const LogTarget& log_target,
                   std::span<const Coordinate> coords, Rng& rng);

// ---------------------------------------------------------------------------
// Particle clouds and configuration

enum class Phase { PhaseI, PhaseII };

/// One posterior draw. Phase-I draws leave a2 and c at zero.
struct Particle {
  double a1 = 0.0;
  double e1 = 0.0;
  double a2 = 0.0;
  double c = 0.0;
  bool operator==(const Particle&) const = default;
};

struct ChainStats {
  long accepted = 0;
  long updates = 0;
  long discards = 0;
  long spacing_proposals = 0;

  double acceptance_rate() const { return updates ? static_cast<double>(accepted) / updates : 0.0; }
  double discard_fraction() const {
    return spacing_proposals ? static_cast<double>(discards) / spacing_proposals : 0.0;
  }
};

/// Discretized posterior: the particles act as the prior of the next phase.
struct ParticleCloud {
  std::vector<Particle> draws;
  std::vector<double> weights;  // empty means uniform
  Phase phase = Phase::PhaseI;
  std::uint64_t seed = 0;
  ChainStats stats;

  /// Index drawn in proportion to the weights.
  std::size_t resample_index(Rng& rng) const;
};

struct ProposalScales {
  double amplitude = 0.03;    // ~10% of the Beta(1,1) standard deviation
  double log_energy = 0.1;
  double log_spacing = 0.1;
  // Steps along the likelihood ridges A1 exp(-E1 t1) = const (Phase I) and
  // A2 exp(-c t2) = const (Phase II), in units of E1 and c.
  double ridge_energy = 0.02;
  double ridge_spacing = 0.05;
  bool operator==(const ProposalScales&) const = default;
};

struct McmcConfig {
  int iters_phase1 = 1000;
  int iters_phase2 = 1000;
  int m = 1000;
  double c0 = 0.1;
  double e1_0 = 1.0;  // standalone Phase I start; phase3 redraws it per repetition
  int burn_in = 100;
  ProposalScales scales;
  double discard_limit = 0.5;
  double min_acceptance = 0.01;
  double max_failed_fraction = 0.2;
  bool cycle_intermediate = false;  // feed times strictly between t2 and t1 through Phase I
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const McmcConfig&) const = default;
};

enum class Parameter { A1 = 0, E1 = 1, A2 = 2, C = 3 };
inline constexpr std::array<const char*, 4> kParameterNames{"a1", "e1", "a2", "c"};

/// Outcome of a full three-phase run.
struct FitReport {
  static constexpr int kFormatMajor = 1;
  static constexpr int kFormatMinor = 0;

  McmcConfig config;
  PriorSpec priors;
  TelescopeSchedule schedule;
  ObservationPair observations;
  int summary_bins = 50;
  double ci_level = 0.95;

  ParticleCloud posterior;
  std::array<PosteriorSummary, 4> summaries;

  long discard_count = 0;
  long spacing_proposals = 0;
  double discard_fraction = 0.0;
  int failed_repetitions = 0;
  double acceptance_phase1 = 0.0;
  double acceptance_phase2 = 0.0;
  std::vector<std::string> notes;  // one line per failed repetition, capped

  const PosteriorSummary& summary(Parameter p) const { return summaries[static_cast<int>(p)]; }
  std::vector<double> column(Parameter p) const;
};

bool operator==(const ParticleCloud& a, const ParticleCloud& b);
bool operator==(const FitReport& a, const FitReport& b);

// ---------------------------------------------------------------------------
// Phases

/// True when a spacing proposal must be discarded: c < c0 (equality is kept).
inline bool enforce_spacing_floor(double c_proposed, double c0) { return c_proposed < c0; }

/// Optional replacement of the Beta prior on A_1 by a particle set, used when
/// peeling seeds the next level with the previous A_2 posterior.
struct AmplitudeSeed {
  std::vector<double> particles;
  bool empty() const { return particles.empty(); }
};

/// Metropolis-within-Gibbs chain over (A1, E1) targeting prior x marginal
/// likelihood of y1, started at (A1 ~ prior, E1 = cfg.e1_0). Every sweep also
/// makes a ridge move E1 += d, A1 *= exp(t1 d) that keeps A1 exp(-E1 t1) fixed;
/// with a particle seed, A1 is drawn from the particles and E1 shifted the same
/// way. Each extra
/// observation then runs one more cycle, in decreasing t, whose prior is the
/// previous cycle's cloud. Returns the post-burn-in draws of the last cycle.
/// Throws SamplerError when the acceptance rate falls below cfg.min_acceptance.
ParticleCloud phase1(const CorrelatorPoint& y1, const PriorSpec& priors, const McmcConfig& cfg,
                     std::span<const CorrelatorPoint> extra_obs = {},
                     const AmplitudeSeed& a1_seed = {});

/// Chain over (A1, E1, A2, c): (A1, E1) is proposed by resampling `cloud1`,
/// which also serves as its prior, once with (A2, c) held and once with c
/// re-solved so that G(t2) is unchanged. A2 and c get random-walk updates plus
/// a ridge move c += d, A2 *= exp(t2 d); c proposals below cfg.c0 are discarded
/// and redrawn. The chain starts at the last
/// Phase-I particle, A2 ~ prior and c = cfg.c0. Throws DiscardAbort when the
/// discard fraction exceeds cfg.discard_limit.
ParticleCloud phase2(const ObservationPair& obs, const ParticleCloud& cloud1, const PriorSpec& priors,
                     const McmcConfig& cfg);

struct FitOptions {
  int threads = 1;
  int summary_bins = 50;
  double ci_level = 0.95;
  AmplitudeSeed a1_seed;
};

/// Builds the observation pair for a two-row schedule.
ObservationPair observations_for(const CorrelatorDataset& data, const TelescopeSchedule& schedule);

/// Repeats Phase I + Phase II cfg.m times with independent streams keyed by
/// (seed, repetition); repetition i starts from E1 ~ prior and c = cfg.c0 and
/// contributes its final Phase-II state. Output order is the repetition order
/// regardless of the thread count. Throws DiscardAbort (discard-driven) or
/// SamplerError when more than cfg.max_failed_fraction of the repetitions fail.
FitReport phase3(const CorrelatorDataset& data, const TelescopeSchedule& schedule, const PriorSpec& priors,
                 const McmcConfig& cfg, const FitOptions& options = {});

}  // namespace telefit

#endif  // TELEFIT_SAMPLER_HPP
