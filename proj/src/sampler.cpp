#include "telefit/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <thread>

#include "telefit/dataio.hpp"
#include "telefit/error.hpp"

namespace telefit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxRedraws = 64;
constexpr std::size_t kMaxNotes = 20;

bool accept_move(double lp_new, double lp_cur, double log_hastings, Rng& rng) {
  if (std::isnan(lp_new) || lp_new == kNegInf) return false;
  if (lp_cur == kNegInf) return true;
  const double log_alpha = lp_new - lp_cur + log_hastings;
  if (log_alpha >= 0.0) return true;
  return std::log(uniform_open(rng)) < log_alpha;
}

// Reflects y into (0, 1); nullopt for the endpoints.
std::optional<double> reflect_unit(double y) {
  y = std::fmod(std::abs(y), 2.0);
  if (y > 1.0) y = 2.0 - y;
  if (y <= 0.0 || y >= 1.0) return std::nullopt;
  return y;
}

struct Proposal {
  double value;
  double log_hastings;
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Raw (pre-floor) proposal from x.
std::optional<Proposal> propose(const Coordinate& coord, double x, Rng& rng) {
  const double z = standard_normal(rng);
  switch (coord.support) {
    case Support::Real:
      return Proposal{x + coord.scale * z, 0.0};
    case Support::Unit: {
      auto y = reflect_unit(x + coord.scale * z);
      if (!y) return std::nullopt;
      return Proposal{*y, 0.0};
    }
    case Support::Positive: {
      const double lx = std::log(x);
      double lu = lx + coord.scale * z;
      if (std::isfinite(coord.upper)) {
        const double bound = std::log(coord.upper);
        if (lu > bound) lu = 2.0 * bound - lu;
      }
      // log-space walk: q(x|x') / q(x'|x) = x' / x
      return Proposal{std::exp(lu), lu - lx};
    }
  }
  return std::nullopt;
}

// Probability that a raw proposal from x clears the floor. Redrawing until it
// does divides the proposal density by this, so the ratio needs
// log Z(x) - log Z(x').
double log_floor_mass(const Coordinate& coord, double x) {
  if (!std::isfinite(coord.floor)) return 0.0;
  double mass = 0.0;
  switch (coord.support) {
    case Support::Real:
      mass = normal_cdf((x - coord.floor) / coord.scale);
      break;
    case Support::Unit:
      return 0.0;  // floors are not used on amplitudes
    case Support::Positive: {
      if (!(coord.floor > 0.0)) return 0.0;
      const double lx = std::log(x);
      const double lf = std::log(coord.floor);
      if (std::isfinite(coord.upper)) {
        const double bound = std::log(coord.upper);
        if (lf >= bound) return kNegInf;
        // folded walk lands in [lf, bound] iff the raw step lands in [lf, 2 bound - lf]
        mass = normal_cdf((2.0 * bound - lf - lx) / coord.scale) - normal_cdf((lf - lx) / coord.scale);
      } else {
        mass = normal_cdf((lx - lf) / coord.scale);
      }
      break;
    }
  }
  return mass > 0.0 ? std::log(mass) : kNegInf;
}

}  // namespace

StepResult mh_step(std::span<double> state, const LogTarget& log_target, std::span<const Coordinate> coords,
                   Rng& rng) {
  if (coords.size() != state.size()) throw InvalidArgument("mh_step: one coordinate spec per state entry");
  StepResult result;
  result.accepted.assign(state.size(), false);
  double lp_cur = log_target(state);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const Coordinate& coord = coords[i];
    const double current = state[i];
    std::optional<Proposal> prop;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      auto p = propose(coord, current, rng);
      ++result.proposals;
      if (p && p->value < coord.floor) {
        ++result.discards;
        continue;
      }
      prop = p;
      break;
    }
    if (!prop) continue;
    const double log_hastings =
        prop->log_hastings + log_floor_mass(coord, current) - log_floor_mass(coord, prop->value);
    state[i] = prop->value;
    const double lp_new = log_target(state);
    if (accept_move(lp_new, lp_cur, std::isnan(log_hastings) ? 0.0 : log_hastings, rng)) {
      lp_cur = lp_new;
      result.accepted[i] = true;
    } else {
      state[i] = current;
    }
  }
  return result;
}

std::size_t ParticleCloud::resample_index(Rng& rng) const {
  if (draws.empty()) throw InvalidArgument("cannot resample an empty particle cloud");
  if (weights.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, draws.size() - 1);
    return pick(rng);
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return pick(rng);
}

void McmcConfig::validate() const {
  if (iters_phase1 <= 0 || iters_phase2 <= 0 || m <= 0) throw InvalidArgument("iteration counts must be positive");
  if (burn_in < 0 || burn_in >= iters_phase1 || burn_in >= iters_phase2)
    throw InvalidArgument("burn-in must be non-negative and shorter than each phase");
  if (!(c0 > 0.0)) throw InvalidArgument("c0 must be positive");
  if (!(e1_0 > 0.0)) throw InvalidArgument("E1 starting value must be positive");
  if (!(scales.amplitude > 0.0 && scales.log_energy > 0.0 && scales.log_spacing > 0.0 &&
        scales.ridge_energy > 0.0 && scales.ridge_spacing > 0.0))
    throw InvalidArgument("proposal scales must be positive");
  if (!(discard_limit > 0.0 && discard_limit <= 1.0)) throw InvalidArgument("discard limit must be in (0,1]");
  if (!(min_acceptance >= 0.0 && min_acceptance < 1.0)) throw InvalidArgument("min acceptance must be in [0,1)");
  if (!(max_failed_fraction >= 0.0 && max_failed_fraction < 1.0))
    throw InvalidArgument("max failed fraction must be in [0,1)");
}

std::vector<double> FitReport::column(Parameter p) const {
  std::vector<double> out;
  out.reserve(posterior.draws.size());
  for (const auto& d : posterior.draws) {
    switch (p) {
      case Parameter::A1: out.push_back(d.a1); break;
      case Parameter::E1: out.push_back(d.e1); break;
      case Parameter::A2: out.push_back(d.a2); break;
      case Parameter::C: out.push_back(d.c); break;
    }
  }
  return out;
}

bool operator==(const ParticleCloud& a, const ParticleCloud& b) {
  return a.draws == b.draws && a.weights == b.weights && a.phase == b.phase && a.seed == b.seed;
}

bool operator==(const FitReport& a, const FitReport& b) {
  return a.config == b.config && a.priors == b.priors && a.schedule == b.schedule &&
         a.observations == b.observations && a.summary_bins == b.summary_bins && a.ci_level == b.ci_level &&
         a.posterior == b.posterior && a.summaries == b.summaries && a.discard_count == b.discard_count &&
         a.spacing_proposals == b.spacing_proposals && a.discard_fraction == b.discard_fraction &&
         a.failed_repetitions == b.failed_repetitions && a.acceptance_phase1 == b.acceptance_phase1 &&
         a.acceptance_phase2 == b.acceptance_phase2 && a.notes == b.notes;
}

// ---------------------------------------------------------------------------
// Phase I

namespace {

void check_acceptance(const ChainStats& stats, const McmcConfig& cfg, const char* phase) {
  if (stats.acceptance_rate() < cfg.min_acceptance)
    throw SamplerError(std::string(phase) + " acceptance rate " + format_double(stats.acceptance_rate()) +
                       " is below " + format_double(cfg.min_acceptance) + "; proposal scales are mis-sized");
}

// Extra cycle: the previous cloud is both prior and independence proposal for
// (A1, E1), so acceptance reduces to the likelihood ratio of the new point.
std::vector<Particle> cycle_on_cloud(const std::vector<Particle>& prior_cloud, const CorrelatorPoint& obs,
                                     Particle state, const McmcConfig& cfg, Rng& rng, ChainStats& stats) {
  std::uniform_int_distribution<std::size_t> pick(0, prior_cloud.size() - 1);
  auto loglik = [&](const Particle& p) { return log_lik_marginal(p.a1, p.e1, obs.y, obs.sigma, obs.t); };
  double lp = loglik(state);
  std::vector<Particle> draws;
  draws.reserve(static_cast<std::size_t>(cfg.iters_phase1 - cfg.burn_in));
  for (int it = 0; it < cfg.iters_phase1; ++it) {
    const Particle cand = prior_cloud[pick(rng)];
    const double lp_new = loglik(cand);
    ++stats.updates;
    if (accept_move(lp_new, lp, 0.0, rng)) {
      state = cand;
      lp = lp_new;
      ++stats.accepted;
    }
    if (it >= cfg.burn_in) draws.push_back(state);
  }
  return draws;
}

}  // namespace

namespace {

// Ridge move on (amp, rate): rate' = rate + delta, amp' = amp exp(t delta), so
// amp exp(-rate t) is unchanged. Symmetric in (log amp, rate); the Jacobian of
// the log map gives log q-ratio = t delta. Rates below `floor` are discarded and
// redrawn with the matching proposal renormalization.
struct RidgeOutcome {
  bool accepted = false;
  long discards = 0;
  long proposals = 0;
};

RidgeOutcome ridge_step(double& amp, double& rate, int t, double scale, double floor,
                        const std::function<double(double, double)>& log_target, Rng& rng) {
  RidgeOutcome out;
  double delta = 0.0;
  bool found = false;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    delta = scale * standard_normal(rng);
    ++out.proposals;
    if (rate + delta < floor) {
      ++out.discards;
      continue;
    }
    found = true;
    break;
  }
  if (!found) return out;
  const double new_rate = rate + delta;
  const double new_amp = amp * std::exp(t * delta);
  double log_hastings = t * delta;
  if (std::isfinite(floor))
    log_hastings += std::log(normal_cdf((rate - floor) / scale)) - std::log(normal_cdf((new_rate - floor) / scale));
  if (accept_move(log_target(new_amp, new_rate), log_target(amp, rate), log_hastings, rng)) {
    amp = new_amp;
    rate = new_rate;
    out.accepted = true;
  }
  return out;
}

// Log-walk on an amplitude with a step matched to the observation's relative
// error, so a chain can settle onto a likelihood ridge much narrower than the
// regular amplitude step. The scale depends only on the data, hence fixed.
double fine_scale(double y, double sigma, double coarse) {
  return y > 0.0 ? std::min(coarse, sigma / y) : coarse;
}

bool fine_amplitude_step(double& amp, double scale, const std::function<double(double)>& log_target, Rng& rng) {
  const double log_step = scale * standard_normal(rng);
  const double cand = amp * std::exp(log_step);
  if (!(cand < 1.0)) return false;
  if (accept_move(log_target(cand), log_target(amp), log_step, rng)) {
    amp = cand;
    return true;
  }
  return false;
}

}  // namespace

ParticleCloud phase1(const CorrelatorPoint& y1, const PriorSpec& priors, const McmcConfig& cfg,
                     std::span<const CorrelatorPoint> extra_obs, const AmplitudeSeed& a1_seed) {
  cfg.validate();
  priors.validate();
  if (!(y1.sigma > 0.0)) throw InvalidArgument("phase1: sigma must be positive");
  for (const auto& p : extra_obs)
    if (p.t >= y1.t) throw InvalidArgument("phase1: extra observations must precede t1");

  Rng rng(cfg.seed);
  ParticleCloud cloud;
  cloud.phase = Phase::PhaseI;
  cloud.seed = cfg.seed;

  const bool seeded = !a1_seed.empty();
  std::uniform_int_distribution<std::size_t> pick_seed(0, seeded ? a1_seed.particles.size() - 1 : 0);

  std::array<double, 2> state{seeded ? a1_seed.particles[pick_seed(rng)] : sample_amplitude(priors, rng), cfg.e1_0};

  auto loglik = [&](double a1, double e1) { return log_lik_marginal(a1, e1, y1.y, y1.sigma, y1.t); };
  // With a particle prior on A1 the amplitude density is flat over the particle set.
  auto log_post = [&](double a1, double e1) {
    const double la = seeded ? ((a1 > 0.0 && a1 < 1.0) ? 0.0 : kNegInf) : log_amplitude_density(priors, a1);
    const double le = log_energy_density(priors, e1);
    if (la == kNegInf || le == kNegInf) return kNegInf;
    return la + le + loglik(a1, e1);
  };
  const LogTarget target = [&](std::span<const double> s) { return log_post(s[0], s[1]); };
  const LogTarget energy_target = [&](std::span<const double> s) { return log_post(state[0], s[0]); };

  const std::array<Coordinate, 2> both{Coordinate{Support::Unit, cfg.scales.amplitude},
                                       Coordinate{Support::Positive, cfg.scales.log_energy}};
  const std::array<Coordinate, 1> energy_only{both[1]};
  const double fine_a1 = fine_scale(y1.y, y1.sigma, cfg.scales.amplitude);

  std::vector<Particle> draws;
  draws.reserve(static_cast<std::size_t>(cfg.iters_phase1 - cfg.burn_in));
  for (int it = 0; it < cfg.iters_phase1; ++it) {
    if (seeded) {
      // Independence draw from the particle set, with E1 shifted so that
      // A1 exp(-E1 t1) is preserved (unit Jacobian); the particle prior cancels.
      const double cand = a1_seed.particles[pick_seed(rng)];
      const double cand_e1 = state[1] + std::log(cand / state[0]) / y1.t;
      ++cloud.stats.updates;
      if (accept_move(log_post(cand, cand_e1), log_post(state[0], state[1]), 0.0, rng)) {
        state = {cand, cand_e1};
        ++cloud.stats.accepted;
      }
      const auto r = mh_step(std::span<double>(&state[1], 1), energy_target, energy_only, rng);
      ++cloud.stats.updates;
      cloud.stats.accepted += r.accepted[0];
    } else {
      const auto r = mh_step(state, target, both, rng);
      cloud.stats.updates += 2;
      cloud.stats.accepted += std::count(r.accepted.begin(), r.accepted.end(), true);
      const auto ridge = ridge_step(state[0], state[1], y1.t, cfg.scales.ridge_energy, kNegInf, log_post, rng);
      ++cloud.stats.updates;
      cloud.stats.accepted += ridge.accepted;
      ++cloud.stats.updates;
      cloud.stats.accepted += fine_amplitude_step(
          state[0], fine_a1, [&](double a1) { return log_post(a1, state[1]); }, rng);
    }
    if (it >= cfg.burn_in) draws.push_back(Particle{state[0], state[1], 0.0, 0.0});
  }
  check_acceptance(cloud.stats, cfg, "phase I");

  std::vector<CorrelatorPoint> extras(extra_obs.begin(), extra_obs.end());
  std::sort(extras.begin(), extras.end(), [](const auto& a, const auto& b) { return a.t > b.t; });
  for (const auto& obs : extras) {
    ChainStats cycle_stats;
    draws = cycle_on_cloud(draws, obs, draws.back(), cfg, rng, cycle_stats);
    cloud.stats.accepted += cycle_stats.accepted;
    cloud.stats.updates += cycle_stats.updates;
  }
  check_acceptance(cloud.stats, cfg, "phase I");

  cloud.draws = std::move(draws);
  return cloud;
}

// ---------------------------------------------------------------------------
// Phase II

ParticleCloud phase2(const ObservationPair& obs, const ParticleCloud& cloud1, const PriorSpec& priors,
                     const McmcConfig& cfg) {
  cfg.validate();
  priors.validate();
  obs.validate();
  if (cloud1.draws.empty()) throw InvalidArgument("phase2: empty Phase-I cloud");

  Rng rng(cfg.seed);
  ParticleCloud cloud;
  cloud.phase = Phase::PhaseII;
  cloud.seed = cfg.seed;

  Particle cur = cloud1.draws.back();
  cur.a2 = sample_amplitude(priors, rng);
  cur.c = cfg.c0;

  // Target without the (A1, E1) cloud prior, which cancels against the
  // resampling proposal. Spacings below c0 carry no mass.
  auto log_post = [&](double a1, double e1, double a2, double c) {
    if (c < cfg.c0) return kNegInf;
    const double la = log_amplitude_density(priors, a2);
    const double ls = log_spacing_density(priors, e1, c);
    if (la == kNegInf || ls == kNegInf) return kNegInf;
    return la + ls + log_lik_conditional(a1, e1, a2, c, obs);
  };
  const int t2 = obs.t2;
  const double fine_a2 = fine_scale(obs.y2, obs.sigma2, cfg.scales.amplitude);

  std::vector<Particle> draws;
  draws.reserve(static_cast<std::size_t>(cfg.iters_phase2 - cfg.burn_in));
  std::array<double, 2> tail{};
  for (int it = 0; it < cfg.iters_phase2; ++it) {
    // (1) plain particle move, (A2, c) held
    {
      const Particle& cand = cloud1.draws[cloud1.resample_index(rng)];
      ++cloud.stats.updates;
      if (accept_move(log_post(cand.a1, cand.e1, cur.a2, cur.c), log_post(cur.a1, cur.e1, cur.a2, cur.c), 0.0,
                      rng)) {
        cur.a1 = cand.a1;
        cur.e1 = cand.e1;
        ++cloud.stats.accepted;
      }
    }
    // (2) particle move with c re-solved so the model value at t2 is unchanged;
    //     |dc'/dc| = exp(t2 (E1' - E1)) u / u' with u = A2 exp(-c t2)
    {
      const Particle& cand = cloud1.draws[cloud1.resample_index(rng)];
      ++cloud.stats.updates;
      const double u = cur.a2 * std::exp(-cur.c * t2);
      const double g2 = std::exp(-cur.e1 * t2) * (cur.a1 + u);
      const double u_new = g2 * std::exp(cand.e1 * t2) - cand.a1;
      if (u_new > 0.0 && u_new < cur.a2) {
        const double c_new = std::log(cur.a2 / u_new) / t2;
        const double log_jac = t2 * (cand.e1 - cur.e1) + std::log(u) - std::log(u_new);
        if (accept_move(log_post(cand.a1, cand.e1, cur.a2, c_new), log_post(cur.a1, cur.e1, cur.a2, cur.c),
                        log_jac, rng)) {
          cur.a1 = cand.a1;
          cur.e1 = cand.e1;
          cur.c = c_new;
          ++cloud.stats.accepted;
        }
      }
    }
    // (3) coordinate-wise walk on (A2, c); c proposals below c0 are discarded
    {
      tail = {cur.a2, cur.c};
      const LogTarget target = [&](std::span<const double> s) { return log_post(cur.a1, cur.e1, s[0], s[1]); };
      const std::array<Coordinate, 2> coords{
          Coordinate{Support::Unit, cfg.scales.amplitude},
          Coordinate{Support::Positive, cfg.scales.log_spacing, priors.omega / cur.e1, cfg.c0}};
      const auto r = mh_step(tail, target, coords, rng);
      cloud.stats.updates += 2;
      cloud.stats.accepted += std::count(r.accepted.begin(), r.accepted.end(), true);
      cloud.stats.discards += r.discards;
      cloud.stats.spacing_proposals += r.proposals - 1;  // the A2 coordinate drew exactly one
      cur.a2 = tail[0];
      cur.c = tail[1];
    }
    // (4) ridge move keeping A2 exp(-c t2) fixed
    {
      auto ridge_target = [&](double a2, double c) { return log_post(cur.a1, cur.e1, a2, c); };
      const auto r = ridge_step(cur.a2, cur.c, t2, cfg.scales.ridge_spacing, cfg.c0, ridge_target, rng);
      ++cloud.stats.updates;
      cloud.stats.accepted += r.accepted;
      cloud.stats.discards += r.discards;
      cloud.stats.spacing_proposals += r.proposals;
    }
    // (5) fine log-walk on A2
    ++cloud.stats.updates;
    cloud.stats.accepted += fine_amplitude_step(
        cur.a2, fine_a2, [&](double a2) { return log_post(cur.a1, cur.e1, a2, cur.c); }, rng);

    if (it >= cfg.burn_in) draws.push_back(cur);
  }

  if (cloud.stats.discard_fraction() > cfg.discard_limit)
    throw DiscardAbort("spacing discard fraction " + format_double(cloud.stats.discard_fraction()) +
                       " exceeds the limit " + format_double(cfg.discard_limit) +
                       "; decrease c0 and reselect the truncation times");

  cloud.draws = std::move(draws);
  return cloud;
}

// ---------------------------------------------------------------------------
// Phase III

ObservationPair observations_for(const CorrelatorDataset& data, const TelescopeSchedule& schedule) {
  if (schedule.order() != 2) throw InvalidArgument("the fit needs a two-row schedule (k = 2)");
  const auto& p1 = data.at_time(schedule.times[0]);
  const auto& p2 = data.at_time(schedule.times[1]);
  ObservationPair obs{p1.y, p2.y, p1.sigma, p2.sigma, data.rho12, p1.t, p2.t};
  obs.validate();
  return obs;
}

namespace {

struct RepetitionOutcome {
  std::optional<Particle> particle;
  ChainStats phase1_stats;
  ChainStats phase2_stats;
  bool discard_abort = false;
  std::string message;
};

RepetitionOutcome run_repetition(std::size_t rep, const CorrelatorPoint& y1, const ObservationPair& obs,
                                 std::span<const CorrelatorPoint> extras, const PriorSpec& priors,
                                 const McmcConfig& cfg, const AmplitudeSeed& a1_seed) {
  RepetitionOutcome out;
  try {
    Rng rng(derive_seed(cfg.seed, {rep, 0}));
    McmcConfig rep_cfg = cfg;
    rep_cfg.e1_0 = sample_energy(priors, rng);
    rep_cfg.seed = derive_seed(cfg.seed, {rep, 1});
    const ParticleCloud cloud1 = phase1(y1, priors, rep_cfg, extras, a1_seed);
    out.phase1_stats = cloud1.stats;
    rep_cfg.seed = derive_seed(cfg.seed, {rep, 2});
    const ParticleCloud cloud2 = phase2(obs, cloud1, priors, rep_cfg);
    out.phase2_stats = cloud2.stats;
    out.particle = cloud2.draws.back();
  } catch (const DiscardAbort& e) {
    out.discard_abort = true;
    out.message = "repetition " + std::to_string(rep) + ": " + e.what();
  } catch (const SamplerError& e) {
    out.message = "repetition " + std::to_string(rep) + ": " + e.what();
  }
  return out;
}

}  // namespace

FitReport phase3(const CorrelatorDataset& data, const TelescopeSchedule& schedule, const PriorSpec& priors,
                 const McmcConfig& cfg, const FitOptions& options) {
  cfg.validate();
  priors.validate();
  data.validate();
  const ObservationPair obs = observations_for(data, schedule);
  const CorrelatorPoint& y1 = data.at_time(schedule.times[0]);

  std::vector<CorrelatorPoint> extras;
  if (cfg.cycle_intermediate)
    for (const auto& p : data.points)
      if (p.t > obs.t2 && p.t < obs.t1) extras.push_back(p);

  const auto m = static_cast<std::size_t>(cfg.m);
  std::vector<RepetitionOutcome> outcomes(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < m; i = next++)
      outcomes[i] = run_repetition(i, y1, obs, extras, priors, cfg, options.a1_seed);
  };
  const int threads = std::clamp(options.threads, 1, static_cast<int>(std::min<std::size_t>(m, 256)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  FitReport report;
  report.config = cfg;
  report.priors = priors;
  report.schedule = schedule;
  report.observations = obs;
  report.summary_bins = options.summary_bins;
  report.ci_level = options.ci_level;
  report.posterior.phase = Phase::PhaseII;
  report.posterior.seed = cfg.seed;

  ChainStats p1, p2;
  int discard_failures = 0;
  for (const auto& o : outcomes) {
    if (!o.particle) {
      ++report.failed_repetitions;
      discard_failures += o.discard_abort;
      if (report.notes.size() < kMaxNotes) report.notes.push_back(o.message);
      continue;
    }
    report.posterior.draws.push_back(*o.particle);
    p1.accepted += o.phase1_stats.accepted;
    p1.updates += o.phase1_stats.updates;
    p2.accepted += o.phase2_stats.accepted;
    p2.updates += o.phase2_stats.updates;
    p2.discards += o.phase2_stats.discards;
    p2.spacing_proposals += o.phase2_stats.spacing_proposals;
  }

  if (report.failed_repetitions > cfg.max_failed_fraction * static_cast<double>(m) ||
      report.posterior.draws.empty()) {
    const std::string msg = std::to_string(report.failed_repetitions) + " of " + std::to_string(m) +
                            " repetitions failed" + (report.notes.empty() ? "" : "; first: " + report.notes.front());
    if (2 * discard_failures >= report.failed_repetitions)
      throw DiscardAbort(msg);
    throw SamplerError(msg);
  }

  report.discard_count = p2.discards;
  report.spacing_proposals = p2.spacing_proposals;
  report.discard_fraction = p2.discard_fraction();
  report.acceptance_phase1 = p1.acceptance_rate();
  report.acceptance_phase2 = p2.acceptance_rate();
  for (int p = 0; p < 4; ++p) {
    const auto col = report.column(static_cast<Parameter>(p));
    report.summaries[static_cast<std::size_t>(p)] = summarize_any(col, options.summary_bins, options.ci_level);
  }
  return report;
}

}  // namespace telefit
