#ifndef TELEFIT_CLI_HPP
#define TELEFIT_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "telefit/priors.hpp"

namespace telefit::cli {

// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kSamplerAbort = 3,
  kPeelEarlyStop = 4,
};

/// Runs the command line `args` (args[0] is the program name) and returns the
/// exit code. Console output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands grid specifications into prior specs.
///
/// Each spec is either `key=v1,v2,...` or a zipped `k1:k2=a1:b1,a2:b2,...`;
/// several specs combine as a cross product, the first one varying slowest.
/// Keys: alpha, beta, omega, eta (gamma scale), lambda (gamma shape),
/// energy (gamma|pareto), xmin and pareto_shape. Throws InvalidArgument.
std::vector<PriorSpec> expand_grid(const std::vector<std::string>& specs, const PriorSpec& base);

}  // namespace telefit::cli

#endif  // TELEFIT_CLI_HPP
