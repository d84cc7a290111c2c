#include "telefit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "telefit/dataio.hpp"
#include "telefit/error.hpp"

namespace telefit {

std::vector<HistogramBin> histogram(std::span<const double> draws, int bins) {
  if (draws.empty()) throw InvalidArgument("histogram of no draws");
  if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(draws.begin(), draws.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / bins;

  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[b].left = lo + b * width;
    out[b].right = (b + 1 == bins) ? hi : lo + (b + 1) * width;
  }
  for (double x : draws) {
    int b = width > 0.0 ? static_cast<int>((x - lo) / width) : 0;
    out[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))].count++;
  }
  return out;
}

PosteriorSummary summarize_any(std::span<const double> draws, int bins, double ci_level) {
  if (draws.empty()) throw InvalidArgument("cannot summarize zero draws");
  if (bins < 2) throw InvalidArgument("summaries need at least two bins");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw InvalidArgument("credible level must lie in (0,1)");

  PosteriorSummary s;
  const auto n = draws.size();
  s.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(n);

  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    // inverse empirical CDF: smallest order statistic with F >= p
    auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    return sorted[std::clamp<std::size_t>(k, 1, n) - 1];
  };
  s.ci_low = quantile((1.0 - ci_level) / 2.0);
  s.ci_high = quantile((1.0 + ci_level) / 2.0);

  if (sorted.front() == sorted.back()) {
    s.mode = sorted.front();
    s.mean = sorted.front();
    s.bin_width = 0.0;
    s.degenerate = true;
    return s;
  }

  const auto h = histogram(draws, bins);
  std::size_t best = 0;
  for (std::size_t b = 1; b < h.size(); ++b)
    if (h[b].count > h[best].count) best = b;
  s.bin_width = (sorted.back() - sorted.front()) / bins;
  s.mode = 0.5 * (h[best].left + h[best].right);
  s.degenerate = !(s.ci_low < s.ci_high);
  return s;
}

PosteriorSummary summarize(std::span<const double> draws, int bins, double ci_level) {
  if (draws.size() < 10)
    throw InvalidArgument("summaries need at least 10 draws, got " + std::to_string(draws.size()));
  return summarize_any(draws, bins, ci_level);
}

void write_histogram_csv(std::ostream& os, std::span<const HistogramBin> bins) {
  os << "bin_left,bin_right,count\n";
  for (const auto& b : bins) os << format_double(b.left) << ',' << format_double(b.right) << ',' << b.count << '\n';
}

}  // namespace telefit
