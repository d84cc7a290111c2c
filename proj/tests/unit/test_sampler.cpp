#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <cmath>
#include <numbers>

#include "stats.hpp"
#include "telefit/dataio.hpp"
#include "telefit/error.hpp"
#include "telefit/sampler.hpp"

using namespace telefit;

namespace {

// Runs `steps` sweeps of a one-coordinate chain and returns the visited states.
std::vector<double> run_chain(double start, const LogTarget& target, Coordinate coord, int steps, std::uint64_t seed,
                              long* accepted = nullptr) {
  Rng rng(seed);
  std::array<double, 1> x{start};
  const std::array<Coordinate, 1> coords{coord};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  long acc = 0;
  for (int i = 0; i < steps; ++i) {
    acc += mh_step(x, target, coords, rng).accepted[0];
    out.push_back(x[0]);
  }
  if (accepted) *accepted = acc;
  return out;
}

const LogTarget kStdNormal = [](std::span<const double> s) { return -0.5 * s[0] * s[0]; };
const LogTarget kFlat = [](std::span<const double>) { return 0.0; };

McmcConfig small_config(std::uint64_t seed) {
  McmcConfig cfg;
  cfg.iters_phase1 = 300;
  cfg.iters_phase2 = 300;
  cfg.burn_in = 50;
  cfg.m = 20;
  cfg.seed = seed;
  return cfg;
}

CorrelatorDataset table_data() {
  return simulate_dataset(ExpSumParams{{0.8, 0.6, 0.4, 0.2, 0.1}, 0.9, 0.5}, 12, 0.001, 7);
}

}  // namespace

TEST_CASE("mh_step: zero-width proposals leave the state unchanged") {
  long acc = 0;
  const auto xs = run_chain(0.3, kStdNormal, Coordinate{Support::Real, 1e-300}, 100, 1, &acc);
  for (double x : xs) CHECK(x == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(acc == 100);
}

TEST_CASE("mh_step: flat target accepts everything") {
  long acc = 0;
  run_chain(0.0, kFlat, Coordinate{Support::Real, 1.0}, 10000, 2, &acc);
  CHECK(acc == 10000);
}

TEST_CASE("mh_step: standard normal target") {
  const auto xs = run_chain(0.0, kStdNormal, Coordinate{Support::Real, 2.4}, 101000, 3);
  const std::vector<double> kept(xs.begin() + 1000, xs.end());
  CHECK(std::abs(test::mean(kept)) < 0.05);
  CHECK(std::abs(test::variance(kept) - 1.0) < 0.05);
}

TEST_CASE("mh_step: discard-and-redraw keeps the truncated target") {
  // N(0,1) restricted to x >= 0 has mean sqrt(2/pi)
  Coordinate c{Support::Real, 1.0};
  c.floor = 0.0;
  const auto xs = run_chain(0.5, kStdNormal, c, 201000, 4);
  const std::vector<double> kept(xs.begin() + 1000, xs.end());
  for (double x : kept) REQUIRE(x >= 0.0);
  CHECK(std::abs(test::mean(kept) - std::sqrt(2.0 / std::numbers::pi)) < 0.02);
}

TEST_CASE("mh_step: unit and positive supports") {
  const auto u = run_chain(0.5, kFlat, Coordinate{Support::Unit, 0.3}, 100000, 5);
  for (double x : u) REQUIRE((x > 0.0 && x < 1.0));
  CHECK(std::abs(test::mean(u) - 0.5) < 0.02);

  // Exp(1) target through the log-space walk
  const LogTarget expo = [](std::span<const double> s) { return s[0] > 0.0 ? -s[0] : -INFINITY; };
  const auto e = run_chain(1.0, expo, Coordinate{Support::Positive, 0.8}, 201000, 6);
  const std::vector<double> kept(e.begin() + 1000, e.end());
  for (double x : kept) REQUIRE(x > 0.0);
  CHECK(std::abs(test::mean(kept) - 1.0) < 0.05);

  // flat on (0, 2) with reflection at the upper bound: mean 1
  Coordinate bounded{Support::Positive, 0.5, 2.0};
  const LogTarget box = [](std::span<const double> s) { return (s[0] > 0.0 && s[0] < 2.0) ? 0.0 : -INFINITY; };
  const auto b = run_chain(1.0, box, bounded, 201000, 7);
  for (double x : b) REQUIRE(x < 2.0);
  CHECK(std::abs(test::mean(std::vector<double>(b.begin() + 1000, b.end())) - 1.0) < 0.05);
}

TEST_CASE("enforce_spacing_floor") {
  CHECK(enforce_spacing_floor(0.25, 0.3));
  CHECK_FALSE(enforce_spacing_floor(0.3, 0.3));
  CHECK_FALSE(enforce_spacing_floor(0.9, 0.3));
}

TEST_CASE("McmcConfig validation") {
  McmcConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.m = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.burn_in = cfg.iters_phase1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.c0 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.discard_limit = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.scales.ridge_spacing = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("phase1: near noise-free data pins the product A1 exp(-E1 t1)") {
  const double y1 = 0.8 * std::exp(-0.9 * 12);
  const double sigma = 1e-9;
  McmcConfig cfg = small_config(17);
  cfg.iters_phase1 = 1200;
  cfg.iters_phase2 = 1200;
  cfg.burn_in = 300;
  const auto cloud = phase1(CorrelatorPoint{12, y1, sigma}, PriorSpec{}, cfg);
  REQUIRE(cloud.draws.size() == 900);
  // exact draws leave ~0.27% beyond 3 sigma, so "none" would reject a correct sampler
  int beyond3 = 0, beyond5 = 0;
  for (const auto& p : cloud.draws) {
    const double dev = std::abs(p.a1 * std::exp(-p.e1 * 12) - y1);
    beyond3 += dev > 3 * sigma;
    beyond5 += dev > 5 * sigma;
  }
  CHECK(beyond5 == 0);
  CHECK(beyond3 <= 18);
}

TEST_CASE("phase1: a flat likelihood returns the prior") {
  // final states of independent chains, so the KS test sees independent draws
  const int n = 400;
  std::vector<double> a1, e1;
  for (int i = 0; i < n; ++i) {
    McmcConfig cfg = small_config(derive_seed(99, {static_cast<std::uint64_t>(i)}));
    Rng start(cfg.seed);
    cfg.e1_0 = sample_energy(PriorSpec{}, start);
    const auto cloud = phase1(CorrelatorPoint{12, 1e-5, 1e6}, PriorSpec{}, cfg);
    a1.push_back(cloud.draws.back().a1);
    e1.push_back(cloud.draws.back().e1);
  }
  namespace bm = boost::math;
  const bm::beta_distribution<> beta(1, 1);
  const bm::exponential_distribution<> expo(1);
  const double crit = test::ks_critical_001(n);
  CHECK(test::ks_statistic(a1, [&](double v) { return bm::cdf(beta, v); }) < crit);
  CHECK(test::ks_statistic(e1, [&](double v) { return bm::cdf(expo, v); }) < crit);
}

TEST_CASE("phase1: determinism, cycling and preconditions") {
  const CorrelatorPoint y1{12, 1.6e-5, 1e-7};
  const auto a = phase1(y1, PriorSpec{}, small_config(5));
  const auto b = phase1(y1, PriorSpec{}, small_config(5));
  CHECK(a == b);
  CHECK(a.phase == Phase::PhaseI);
  CHECK(a.seed == 5);

  const std::vector<CorrelatorPoint> extra{{10, 1e-4, 1e-6}, {11, 4e-5, 4e-7}};
  const auto cycled = phase1(y1, PriorSpec{}, small_config(5), extra);
  CHECK(cycled.draws.size() == a.draws.size());
  CHECK_FALSE(cycled == a);

  const std::vector<CorrelatorPoint> late{{13, 1e-5, 1e-7}};
  CHECK_THROWS_AS(phase1(y1, PriorSpec{}, small_config(5), late), InvalidArgument);
  CHECK_THROWS_AS(phase1(CorrelatorPoint{12, 1e-5, 0.0}, PriorSpec{}, small_config(5)), InvalidArgument);
}

TEST_CASE("phase1: acceptance below the minimum is an error") {
  McmcConfig cfg = small_config(3);
  cfg.min_acceptance = 0.99;
  CHECK_THROWS_AS(phase1(CorrelatorPoint{12, 1.6e-5, 1e-9}, PriorSpec{}, cfg), SamplerError);
}

TEST_CASE("phase1: particle seed for A1") {
  AmplitudeSeed seed{{0.3, 0.35, 0.4}};
  const auto cloud = phase1(CorrelatorPoint{12, 1e-5, 1e-6}, PriorSpec{}, small_config(8), {}, seed);
  for (const auto& p : cloud.draws) {
    REQUIRE((p.a1 > 0.0 && p.a1 < 1.0));
    REQUIRE(p.e1 > 0.0);
  }
}

TEST_CASE("phase2: a one-particle cloud fixes A1 and E1") {
  ParticleCloud cloud1;
  cloud1.draws = {Particle{0.8, 0.9, 0, 0}};
  const ObservationPair obs{1.632e-5, 3.748e-3, 1e-7, 1e-5, 0.0, 12, 6};
  const auto out = phase2(obs, cloud1, PriorSpec{}, small_config(4));
  REQUIRE(!out.draws.empty());
  for (const auto& p : out.draws) {
    CHECK(p.a1 == 0.8);
    CHECK(p.e1 == 0.9);
    CHECK(p.c >= small_config(4).c0);
  }
  CHECK(out.phase == Phase::PhaseII);
}

TEST_CASE("phase2: spacing floor and discard abort") {
  ParticleCloud cloud1;
  cloud1.draws = {Particle{0.8, 0.9, 0, 0}, Particle{0.7, 0.88, 0, 0}};
  const ObservationPair obs{1.632e-5, 3.748e-3, 1e-7, 1e-5, 0.0, 12, 6};

  McmcConfig cfg = small_config(6);
  cfg.c0 = 0.3;
  const auto out = phase2(obs, cloud1, PriorSpec{}, cfg);
  for (const auto& p : out.draws) REQUIRE(p.c >= 0.3);
  CHECK(out.stats.spacing_proposals > 0);

  // c0 above omega / E1: every spacing proposal lands below the floor
  cfg.c0 = 5.0;
  CHECK_THROWS_AS(phase2(obs, cloud1, PriorSpec{}, cfg), DiscardAbort);
  try {
    phase2(obs, cloud1, PriorSpec{}, cfg);
  } catch (const DiscardAbort& e) {
    CHECK(std::string(e.what()).find("decrease c0") != std::string::npos);
  }
}

TEST_CASE("phase3: single repetition") {
  const auto data = table_data();
  const auto schedule = select_times(data.points, 2);
  McmcConfig cfg = small_config(12);
  cfg.m = 1;
  const auto r = phase3(data, schedule, PriorSpec{}, cfg);
  REQUIRE(r.posterior.draws.size() == 1);
  const auto& p = r.posterior.draws[0];
  CHECK(r.summary(Parameter::A1).mode == p.a1);
  CHECK(r.summary(Parameter::E1).mean == p.e1);
  CHECK(r.summary(Parameter::C).ci_low == p.c);
  CHECK(r.summary(Parameter::A2).degenerate);
}

TEST_CASE("phase3: thread count does not change the result") {
  const auto data = table_data();
  const auto schedule = select_times(data.points, 2);
  const auto cfg = small_config(21);
  const auto one = phase3(data, schedule, PriorSpec{}, cfg, FitOptions{1});
  const auto three = phase3(data, schedule, PriorSpec{}, cfg, FitOptions{3});
  CHECK(one == three);
  CHECK(one.posterior.draws.size() == 20);
  for (const auto& p : one.posterior.draws) CHECK(p.c >= cfg.c0);
}

TEST_CASE("phase3: too many failed repetitions") {
  const auto data = table_data();
  const auto schedule = select_times(data.points, 2);
  McmcConfig cfg = small_config(2);
  cfg.c0 = 5.0;
  CHECK_THROWS_AS(phase3(data, schedule, PriorSpec{}, cfg), DiscardAbort);
}

TEST_CASE("observations_for") {
  auto data = table_data();
  data.rho12 = 0.2;
  const auto obs = observations_for(data, select_times(data.points, 2));
  CHECK(obs.t1 == 12);
  CHECK(obs.t2 == 6);
  CHECK(obs.y1 == data.at_time(12).y);
  CHECK(obs.sigma2 == data.at_time(6).sigma);
  CHECK(obs.rho12 == 0.2);
  TelescopeSchedule three;
  three.times = {12, 6, 4};
  CHECK_THROWS_AS(observations_for(data, three), InvalidArgument);
}

TEST_CASE("resample_index honours weights") {
  ParticleCloud c;
  c.draws = {Particle{0.1, 1, 0, 0}, Particle{0.2, 1, 0, 0}, Particle{0.3, 1, 0, 0}};
  c.weights = {0.0, 1.0, 0.0};
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(c.resample_index(rng) == 1);
}
