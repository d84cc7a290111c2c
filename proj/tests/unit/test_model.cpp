#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "telefit/error.hpp"
#include "telefit/model.hpp"

using namespace telefit;

namespace {

const ExpSumParams kFive{{0.8, 0.6, 0.4, 0.2, 0.1}, 0.9, 0.5};

std::vector<CorrelatorPoint> grid(int lo, int hi) {
  std::vector<CorrelatorPoint> pts;
  for (int t = lo; t <= hi; ++t) pts.push_back({t, 1.0, 0.1});
  return pts;
}

}  // namespace

TEST_CASE("eval_correlator oracles") {
  CHECK(eval_correlator(kFive, 0) == doctest::Approx(2.1).epsilon(1e-15));
  CHECK(eval_correlator(kFive, 12) == doctest::Approx(1.63501e-5).epsilon(1e-5));
  CHECK(eval_correlator(kFive, 6) == doctest::Approx(3.752735e-3).epsilon(1e-6));
  const ExpSumParams flat{{1.0 - 1e-16}, 1e-12, 1.0};
  CHECK(std::abs(eval_correlator(flat, 5) - 1.0) < 1e-9);
}

TEST_CASE("G(0) equals the amplitude sum") {
  const double sum = std::accumulate(kFive.amplitudes.begin(), kFive.amplitudes.end(), 0.0);
  CHECK(eval_correlator(kFive, 0) == sum);
}

TEST_CASE("ExpSumParams validation") {
  CHECK_NOTHROW(kFive.validate());
  CHECK_THROWS_AS((ExpSumParams{{}, 0.9, 0.5}).validate(), InvalidArgument);
  CHECK_THROWS_AS((ExpSumParams{{1.0}, 0.9, 0.5}).validate(), InvalidArgument);
  CHECK_THROWS_AS((ExpSumParams{{0.0}, 0.9, 0.5}).validate(), InvalidArgument);
  CHECK_THROWS_AS((ExpSumParams{{0.5}, 0.0, 0.5}).validate(), InvalidArgument);
  CHECK_THROWS_AS((ExpSumParams{{0.5}, 0.9, 0.0}).validate(), InvalidArgument);
  CHECK(kFive.energy(1) == 0.9);
  CHECK(kFive.energy(3) == doctest::Approx(1.9));
}

TEST_CASE("telescoped_values oracles") {
  const ExpSumParams two{{0.8, 0.6}, 0.9, 0.5};
  TelescopeSchedule s;
  s.times = {12, 6};
  const auto v = telescoped_values(two, s);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == doctest::Approx(1.63196e-5).epsilon(1e-5));
  CHECK(v[1] == doctest::Approx(3.74807e-3).epsilon(1e-5));
  CHECK(v[0] == doctest::Approx(0.8 * std::exp(-10.8)).epsilon(1e-15));

  TelescopeSchedule one;
  one.times = {7};
  const ExpSumParams single{{0.3}, 0.4, 1.0};
  CHECK(telescoped_values(single, one)[0] == doctest::Approx(0.3 * std::exp(-2.8)).epsilon(1e-15));

  const ExpSumParams three{{0.8, 0.6, 0.4}, 0.9, 0.5};
  TelescopeSchedule s3;
  s3.times = {12, 6, 4};
  const double row3 = std::exp(-3.6) * (0.8 + 0.6 * std::exp(-2.0) + 0.4 * std::exp(-4.0));
  CHECK(telescoped_values(three, s3)[2] == doctest::Approx(row3).epsilon(1e-14));

  TelescopeSchedule too_long;
  too_long.times = {12, 6, 4};
  CHECK_THROWS_AS(telescoped_values(two, too_long), InvalidArgument);
}

TEST_CASE("annihilation_residual oracles") {
  const ExpSumParams two{{0.8, 0.6}, 0.9, 0.5};
  CHECK(annihilation_residual(two, 12, 1) == doctest::Approx(3.034e-8).epsilon(1e-3));
  CHECK(annihilation_residual(two, 12, 1) == doctest::Approx(0.6 * std::exp(-6.0) * std::exp(-10.8)).epsilon(1e-14));
  const double expect = std::exp(-5.4) * (0.4 * std::exp(-6.0) + 0.2 * std::exp(-9.0) + 0.1 * std::exp(-12.0));
  CHECK(annihilation_residual(kFive, 6, 2) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(annihilation_residual(kFive, 6, 2) == doctest::Approx(4.593e-6).epsilon(1e-3));

  // a trailing zero-weight term contributes nothing
  ExpSumParams padded = two;
  padded.amplitudes.push_back(0.0);
  CHECK(annihilation_residual(padded, 5, 2) == 0.0);

  CHECK_THROWS_AS(annihilation_residual(two, 5, 0), InvalidArgument);
  CHECK_THROWS_AS(annihilation_residual(two, 5, 2), InvalidArgument);
}

TEST_CASE("select_times ratio rule") {
  CHECK(select_times(grid(2, 13), 3).times == std::vector<int>{13, 7, 4});
  CHECK(select_times(grid(1, 12), 3).times == std::vector<int>{12, 6, 4});
  CHECK(select_times(grid(1, 12), 1).times == std::vector<int>{12});
  CHECK(select_times(grid(1, 12), 1, TruncationRule::Tolerance, 0.1, 1e-6).times == std::vector<int>{12});
  CHECK(select_times(grid(2, 13), 2).times == std::vector<int>{13, 7});

  // snapping: 13/2 = 6.5 rounds to 7, absent here; 6 and 8 tie, larger wins
  std::vector<CorrelatorPoint> gappy{{2, 1, 1}, {4, 1, 1}, {6, 1, 1}, {8, 1, 1}, {13, 1, 1}};
  CHECK(select_times(gappy, 2).times == std::vector<int>{13, 8});

  CHECK_THROWS_AS(select_times(grid(1, 2), 3), InvalidArgument);
  CHECK_THROWS_AS(select_times({}, 1), InvalidArgument);
  // snapping both rows onto the same time
  std::vector<CorrelatorPoint> sparse{{6, 1, 1}, {12, 1, 1}, {13, 1, 1}};
  CHECK_THROWS_AS(select_times(sparse, 3), InvalidArgument);
}

TEST_CASE("select_times tolerance rule") {
  // exp(-2 * 0.5 * t) < 1e-6 first holds at t = 14 > 12: falls back to the ratio value
  CHECK(select_times(grid(1, 12), 2, TruncationRule::Tolerance, 0.5, 1e-6).times == std::vector<int>{12, 6});
  // exp(-2 t) < 1e-3 first holds at t = 4
  CHECK(select_times(grid(1, 12), 2, TruncationRule::Tolerance, 1.0, 1e-3).times == std::vector<int>{12, 4});
  CHECK_THROWS_AS(select_times(grid(1, 12), 2, TruncationRule::Tolerance, 0.0, 1e-3), InvalidArgument);
  const auto s = select_times(grid(1, 12), 2, TruncationRule::Tolerance, 1.0, 1e-3);
  CHECK(s.rule == TruncationRule::Tolerance);
  CHECK(s.provisional_spacing == 1.0);
  CHECK(s.tolerance == 1e-3);
}

TEST_CASE("manual schedules and rule names") {
  const auto s = manual_schedule(grid(2, 13), {13, 7});
  CHECK(s.rule == TruncationRule::Manual);
  CHECK(s.times == std::vector<int>{13, 7});
  CHECK_THROWS_AS(manual_schedule(grid(2, 13), {7, 13}), InvalidArgument);
  CHECK_THROWS_AS(manual_schedule(grid(2, 13), {14, 7}), InvalidArgument);
  for (auto r : {TruncationRule::Ratio, TruncationRule::Tolerance, TruncationRule::Manual})
    CHECK(truncation_rule_from_string(to_string(r)) == r);
  CHECK_THROWS_AS(truncation_rule_from_string("median"), InvalidArgument);
}
