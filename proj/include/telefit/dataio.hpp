#ifndef TELEFIT_DATAIO_HPP
#define TELEFIT_DATAIO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "telefit/model.hpp"
#include "telefit/sampler.hpp"

namespace telefit {

/// Observed correlator series, sorted by strictly increasing t.
struct CorrelatorDataset {
  std::vector<CorrelatorPoint> points;
  double rho12 = 0.0;
  /// `key = value` metadata; written as `# key = value` comment lines.
  std::map<std::string, std::string> provenance;

  /// Throws DataError on unsorted/duplicate t or non-positive sigma.
  void validate() const;
  const CorrelatorPoint& at_time(int t) const;
  bool has_time(int t) const;
};

/// Reads delimited text (comma or whitespace). A header row naming `t`, `y` and
/// either `sigma` or `err_lo`,`err_hi` is required; other columns are ignored.
/// Two error columns are averaged into sigma. `# key = value` comments become
/// provenance, `# rho12 = x` sets the correlation.
CorrelatorDataset read_dataset(std::istream& is, const std::string& source = "<stream>");
CorrelatorDataset load_dataset(const std::filesystem::path& path);

/// Writes `t,y,sigma` with 17 significant digits, plus `truth` when given.
void write_dataset(std::ostream& os, const CorrelatorDataset& data, const std::vector<double>& truth = {});
void save_dataset(const std::filesystem::path& path, const CorrelatorDataset& data,
                  const std::vector<double>& truth = {});

/// y_t = G(t) + N(0, sigma_t^2) with sigma_t = noise_coeff * G(t) * t, t = 1..t_max.
CorrelatorDataset simulate_dataset(const ExpSumParams& params, int t_max, double noise_coeff,
                                   std::uint64_t seed);

void write_report(std::ostream& os, const FitReport& report);
FitReport read_report(std::istream& is, const std::string& source = "<stream>");
void save_report(const FitReport& report, const std::filesystem::path& path);
FitReport load_report(const std::filesystem::path& path);

/// Shortest decimal that round-trips the double.
std::string format_double(double x);

}  // namespace telefit

#endif  // TELEFIT_DATAIO_HPP
