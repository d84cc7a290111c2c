#include "telefit/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "telefit/error.hpp"

namespace telefit {

void ExpSumParams::validate() const {
  if (amplitudes.empty()) throw InvalidArgument("at least one amplitude is required");
  for (std::size_t n = 0; n < amplitudes.size(); ++n) {
    const double a = amplitudes[n];
    if (!(a > 0.0 && a < 1.0))
      throw InvalidArgument("amplitude A" + std::to_string(n + 1) + " = " + std::to_string(a) +
                            " is outside (0,1)");
  }
  if (!(base_energy > 0.0) || !std::isfinite(base_energy))
    throw InvalidArgument("base energy must be positive");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw InvalidArgument("spacing must be positive");
}

std::string_view to_string(TruncationRule rule) {
  switch (rule) {
    case TruncationRule::Ratio: return "ratio";
    case TruncationRule::Tolerance: return "tolerance";
    case TruncationRule::Manual: return "manual";
  }
  return "ratio";
}

TruncationRule truncation_rule_from_string(std::string_view name) {
  if (name == "ratio") return TruncationRule::Ratio;
  if (name == "tolerance") return TruncationRule::Tolerance;
  if (name == "manual") return TruncationRule::Manual;
  throw InvalidArgument("unknown truncation rule '" + std::string(name) + "'");
}

namespace {

// exp(-E1 t) * sum_{n in [first, last)} A_n exp(-n c t), 0-based n
double partial_sum(const ExpSumParams& p, int t, std::size_t first, std::size_t last) {
  double s = 0.0;
  for (std::size_t n = first; n < last; ++n)
    s += p.amplitudes[n] * std::exp(-static_cast<double>(n) * p.spacing * t);
  return std::exp(-p.base_energy * t) * s;
}

}  // namespace

double eval_correlator(const ExpSumParams& params, int t) {
  return partial_sum(params, t, 0, params.amplitudes.size());
}

std::vector<double> telescoped_values(const ExpSumParams& params, const TelescopeSchedule& schedule) {
  if (schedule.times.size() > params.amplitudes.size())
    throw InvalidArgument("schedule has " + std::to_string(schedule.times.size()) +
                          " rows but only " + std::to_string(params.amplitudes.size()) +
                          " amplitudes are given");
  std::vector<double> rows;
  rows.reserve(schedule.times.size());
  for (std::size_t j = 0; j < schedule.times.size(); ++j)
    rows.push_back(partial_sum(params, schedule.times[j], 0, j + 1));
  return rows;
}

double annihilation_residual(const ExpSumParams& params, int t, int j) {
  if (j < 1 || static_cast<std::size_t>(j) >= params.amplitudes.size())
    throw InvalidArgument("truncation index must satisfy 1 <= j < k");
  return partial_sum(params, t, static_cast<std::size_t>(j), params.amplitudes.size());
}

namespace {

// Nearest available time to target; ties go to the larger time.
int snap(const std::vector<int>& available, double target) {
  int best = available.front();
  double best_dist = std::abs(best - target);
  for (int t : available) {
    const double d = std::abs(t - target);
    if (d < best_dist || (d == best_dist && t > best)) {
      best = t;
      best_dist = d;
    }
  }
  return best;
}

int ratio_time(const std::vector<int>& available, int t1, int j) {
  // round half up
  const double target = std::floor(static_cast<double>(t1) / j + 0.5);
  return snap(available, target);
}

}  // namespace

TelescopeSchedule select_times(std::span<const CorrelatorPoint> points, int k, TruncationRule rule,
                               double c0, double tol) {
  if (points.empty()) throw InvalidArgument("cannot select times from an empty dataset");
  if (k < 1) throw InvalidArgument("truncation order k must be at least 1");
  if (rule == TruncationRule::Manual) throw InvalidArgument("manual schedules are built with manual_schedule");
  if (rule == TruncationRule::Tolerance && !(c0 > 0.0 && tol > 0.0))
    throw InvalidArgument("tolerance rule needs c0 > 0 and tol > 0");

  std::set<int> distinct;
  for (const auto& p : points) distinct.insert(p.t);
  const std::vector<int> available(distinct.begin(), distinct.end());
  if (static_cast<std::size_t>(k) > available.size())
    throw InvalidArgument("k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(available.size()) + " distinct times available");

  TelescopeSchedule schedule;
  schedule.rule = rule;
  schedule.provisional_spacing = c0;
  schedule.tolerance = tol;

  const int t1 = available.back();
  schedule.times.push_back(t1);
  for (int j = 2; j <= k; ++j) {
    int tj = ratio_time(available, t1, j);
    if (rule == TruncationRule::Tolerance) {
      const int prev = schedule.times.back();
      for (int t : available) {
        if (t >= prev) break;
        if (std::exp(-j * c0 * t) < tol) {
          tj = t;
          break;
        }
      }
    }
    if (tj >= schedule.times.back())
      throw InvalidArgument("time selection produced a duplicate or non-decreasing time t" +
                            std::to_string(j) + " = " + std::to_string(tj));
    schedule.times.push_back(tj);
  }
  return schedule;
}

TelescopeSchedule manual_schedule(std::span<const CorrelatorPoint> points, std::vector<int> times) {
  if (times.empty()) throw InvalidArgument("manual schedule needs at least one time");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (j > 0 && !(times[j] < times[j - 1])) throw InvalidArgument("schedule times must be strictly decreasing");
    const bool present =
        std::any_of(points.begin(), points.end(), [&](const CorrelatorPoint& p) { return p.t == times[j]; });
    if (!present) throw InvalidArgument("schedule time " + std::to_string(times[j]) + " is not in the data");
  }
  TelescopeSchedule s;
  s.times = std::move(times);
  s.rule = TruncationRule::Manual;
  return s;
}

}  // namespace telefit
