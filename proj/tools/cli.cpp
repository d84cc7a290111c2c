#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "telefit/dataio.hpp"
#include "telefit/diagnostics.hpp"
#include "telefit/error.hpp"
#include "telefit/peeling.hpp"
#include "telefit/sweep.hpp"

namespace fs = std::filesystem;

namespace telefit::cli {

namespace {

// Usage problems detected after CLI11 parsing succeeded.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::uint64_t seed = 1;
  std::string out;
  int threads = 1;
};

// Flags shared by fit, peel and sweep.
struct FitFlags {
  PriorSpec priors;
  std::string energy_prior = "gamma";
  double eta = 1.0;
  double lambda = 1.0;
  double xmin = 0.01;
  double pareto_shape = 1.5;
  McmcConfig cfg;
  std::string rule = "ratio";
  double tolerance = 1e-6;
  std::vector<int> times;
  int bins = 50;
  double ci = 0.95;
  std::optional<double> rho12;

  PriorSpec resolved_priors() const {
    PriorSpec p = priors;
    if (energy_prior == "gamma")
      p.energy = GammaPrior{eta, lambda};
    else if (energy_prior == "pareto")
      p.energy = ParetoPrior{xmin, pareto_shape};
    else
      throw UsageError("--energy-prior must be gamma or pareto");
    p.validate();
    return p;
  }
  FitOptions options(int threads) const { return FitOptions{threads, bins, ci, {}}; }
};

void add_common(CLI::App* sub, CommonOptions& c, const std::string& out_help) {
  sub->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
  sub->add_option("--out", c.out, out_help);
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_fit_flags(CLI::App* sub, FitFlags& f, bool schedule_flags) {
  sub->add_option("--alpha", f.priors.alpha, "Beta prior alpha for amplitudes")->capture_default_str();
  sub->add_option("--beta", f.priors.beta, "Beta prior beta for amplitudes")->capture_default_str();
  sub->add_option("--omega", f.priors.omega, "Spacing prior c | E1 ~ U(0, omega/E1)")->capture_default_str();
  sub->add_option("--energy-prior", f.energy_prior, "gamma or pareto")->capture_default_str();
  sub->add_option("--eta", f.eta, "Gamma prior scale")->capture_default_str();
  sub->add_option("--lambda", f.lambda, "Gamma prior shape")->capture_default_str();
  sub->add_option("--xmin", f.xmin, "Pareto prior scale")->capture_default_str();
  sub->add_option("--pareto-shape", f.pareto_shape, "Pareto prior shape")->capture_default_str();

  sub->add_option("--m", f.cfg.m, "Phase-III repetitions")->capture_default_str();
  sub->add_option("--iters1", f.cfg.iters_phase1, "Phase-I iterations")->capture_default_str();
  sub->add_option("--iters2", f.cfg.iters_phase2, "Phase-II iterations")->capture_default_str();
  sub->add_option("--burn-in", f.cfg.burn_in, "Burn-in per phase")->capture_default_str();
  sub->add_option("--c0", f.cfg.c0, "Starting spacing and discard floor")->capture_default_str();
  sub->add_option("--e1-0", f.cfg.e1_0, "Phase-I starting energy")->capture_default_str();
  sub->add_option("--discard-limit", f.cfg.discard_limit, "Abort above this discard fraction")
      ->capture_default_str();
  sub->add_option("--max-failed", f.cfg.max_failed_fraction, "Tolerated fraction of failed repetitions")
      ->capture_default_str();
  sub->add_flag("--cycle", f.cfg.cycle_intermediate, "Cycle Phase I over the points between t2 and t1");
  sub->add_option("--bins", f.bins, "Histogram bins for the mode")->capture_default_str();
  sub->add_option("--ci", f.ci, "Credible level")->capture_default_str();
  sub->add_option("--rho12", f.rho12, "Override the dataset correlation");
  if (schedule_flags) {
    sub->add_option("--rule", f.rule, "Truncation rule: ratio or tolerance")->capture_default_str();
    sub->add_option("--tol", f.tolerance, "Tolerance of the tolerance rule")->capture_default_str();
    sub->add_option("--times", f.times, "Explicit truncation times t1,t2")->delimiter(',');
  }
}

std::string energy_prior_text(const PriorSpec& p) {
  if (const auto* g = std::get_if<GammaPrior>(&p.energy))
    return "gamma(scale=" + format_double(g->scale) + ", shape=" + format_double(g->shape) + ")";
  const auto& q = std::get<ParetoPrior>(p.energy);
  return "pareto(xmin=" + format_double(q.x_min) + ", shape=" + format_double(q.shape) + ")";
}

// `# key = value` lines recording everything needed to rerun a command.
void echo_config(std::ostream& os, const std::string& command, const McmcConfig& cfg, const PriorSpec& priors) {
  os << "# command = " << command << '\n'
     << "# seed = " << cfg.seed << '\n'
     << "# m = " << cfg.m << '\n'
     << "# iters_phase1 = " << cfg.iters_phase1 << '\n'
     << "# iters_phase2 = " << cfg.iters_phase2 << '\n'
     << "# burn_in = " << cfg.burn_in << '\n'
     << "# c0 = " << format_double(cfg.c0) << '\n'
     << "# e1_0 = " << format_double(cfg.e1_0) << '\n'
     << "# discard_limit = " << format_double(cfg.discard_limit) << '\n'
     << "# cycle_intermediate = " << (cfg.cycle_intermediate ? "true" : "false") << '\n'
     << "# alpha = " << format_double(priors.alpha) << '\n'
     << "# beta = " << format_double(priors.beta) << '\n'
     << "# omega = " << format_double(priors.omega) << '\n'
     << "# energy_prior = " << energy_prior_text(priors) << '\n';
}

void print_summary(std::ostream& out, const FitReport& r) {
  out << "times    " << r.schedule.times[0] << ',' << r.schedule.times[1] << "  (" << to_string(r.schedule.rule)
      << ")\n";
  out << "param    mode         mean         ci_low       ci_high\n";
  char line[160];
  for (int p = 0; p < 4; ++p) {
    const auto& s = r.summaries[p];
    std::snprintf(line, sizeof line, "%-8s %-12.6g %-12.6g %-12.6g %-12.6g%s\n", kParameterNames[p], s.mode, s.mean,
                  s.ci_low, s.ci_high, s.degenerate ? "  (degenerate)" : "");
    out << line;
  }
  std::snprintf(line, sizeof line, "discard fraction %.4g (%ld of %ld spacing proposals)\n", r.discard_fraction,
                r.discard_count, r.spacing_proposals);
  out << line;
  if (r.failed_repetitions > 0) out << "failed repetitions " << r.failed_repetitions << '\n';
}

TelescopeSchedule resolve_schedule(const CorrelatorDataset& data, const FitFlags& f) {
  if (!f.times.empty()) {
    if (f.times.size() != 2) throw UsageError("--times needs exactly two values t1,t2");
    return manual_schedule(data.points, f.times);
  }
  const TruncationRule rule = truncation_rule_from_string(f.rule);
  if (rule == TruncationRule::Manual) throw UsageError("use --times for a manual schedule");
  return select_times(data.points, 2, rule, f.cfg.c0, f.tolerance);
}

CorrelatorDataset load_input(const std::string& path, const FitFlags& f) {
  CorrelatorDataset data = load_dataset(path);
  if (f.rho12) data.rho12 = *f.rho12;
  return data;
}

void write_histograms(const fs::path& dir, const std::string& prefix, const FitReport& r, int bins,
                      const std::string& source) {
  for (int p = 0; p < 4; ++p) {
    const auto col = r.column(static_cast<Parameter>(p));
    std::ofstream os(dir / (prefix + kParameterNames[p] + ".csv"));
    if (!os) throw DataError("cannot write histogram in " + dir.string());
    os << "# source = " << source << "\n# seed = " << r.config.seed << "\n# parameter = " << kParameterNames[p]
       << '\n';
    write_histogram_csv(os, histogram(col, bins));
  }
}

fs::path ensure_dir(const std::string& out, const std::string& fallback) {
  fs::path dir = out.empty() ? fs::path(fallback) : fs::path(out);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------

struct SimulateFlags {
  std::vector<double> amplitudes;
  double e1 = 0.0;
  double c = 0.0;
  int tmax = 12;
  double noise = 0.001;
  bool emit_truth = false;
  std::optional<double> rho12;
};

int cmd_simulate(const SimulateFlags& s, const CommonOptions& c, std::ostream& out) {
  ExpSumParams params{s.amplitudes, s.e1, s.c};
  params.validate();
  if (s.tmax < 1) throw InvalidArgument("--tmax must be at least 1");
  if (!(s.noise > 0.0)) throw InvalidArgument("--noise must be positive");
  CorrelatorDataset data = simulate_dataset(params, s.tmax, s.noise, c.seed);
  if (s.rho12) {
    data.rho12 = *s.rho12;
    data.validate();
  }
  std::vector<double> truth;
  if (s.emit_truth)
    for (const auto& p : data.points) truth.push_back(eval_correlator(params, p.t));
  if (c.out.empty())
    write_dataset(out, data, truth);
  else
    save_dataset(c.out, data, truth);
  return kOk;
}

int cmd_fit(const std::string& input, const FitFlags& f, const CommonOptions& c, std::ostream& out) {
  const CorrelatorDataset data = load_input(input, f);
  McmcConfig cfg = f.cfg;
  cfg.seed = c.seed;
  const TelescopeSchedule schedule = resolve_schedule(data, f);
  const FitReport report = phase3(data, schedule, f.resolved_priors(), cfg, f.options(c.threads));
  if (!c.out.empty()) save_report(report, c.out);
  print_summary(out, report);
  return kOk;
}

struct PeelFlags {
  int depth = 1;
  double inflation = 2.0;
  std::string estimate = "mode";
  double noise_floor = 3.0;
};

int cmd_peel(const std::string& input, const FitFlags& f, const PeelFlags& pf, const CommonOptions& c,
             std::ostream& out, std::ostream& err) {
  if (pf.depth < 1) throw UsageError("--depth must be at least 1");
  if (pf.estimate != "mode" && pf.estimate != "mean") throw UsageError("--estimate must be mode or mean");
  const CorrelatorDataset data = load_input(input, f);
  McmcConfig cfg = f.cfg;
  cfg.seed = c.seed;
  const PriorSpec priors = f.resolved_priors();
  PeelOptions options;
  options.inflation = pf.inflation;
  options.estimate = pf.estimate == "mode" ? PointEstimate::Mode : PointEstimate::Mean;
  options.noise_floor = pf.noise_floor;
  options.fit = f.options(c.threads);

  const PeelResult result = peel_sequence(data, pf.depth, priors, cfg, options);
  const fs::path dir = ensure_dir(c.out, "peel_out");

  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw DataError("cannot write " + (dir / "manifest.txt").string());
  echo_config(manifest, "peel", cfg, priors);
  manifest << "# input = " << input << "\n# depth = " << pf.depth << "\n# inflation = " << format_double(pf.inflation)
           << "\n# estimate = " << pf.estimate << "\n# noise_floor = " << format_double(pf.noise_floor) << '\n';
  manifest << "level,dataset,report,amplitude,energy\n";
  for (std::size_t j = 0; j < result.levels.size(); ++j) {
    const std::string ds = "level_" + std::to_string(j) + ".csv";
    save_dataset(dir / ds, result.levels[j].dataset);
    std::string rep, a, e;
    if (j < result.reports.size()) {
      rep = "level_" + std::to_string(j) + ".report";
      save_report(result.reports[j], dir / rep);
      a = format_double(result.estimates[j].amplitude);
      e = format_double(result.estimates[j].energy);
    }
    manifest << j << ',' << ds << ',' << rep << ',' << a << ',' << e << '\n';
  }
  if (result.stopped_early) manifest << "# stopped_early = " << result.diagnostic << '\n';

  for (const auto& est : result.estimates)
    out << "level " << est.depth << ": A" << est.depth + 1 << " = " << format_double(est.amplitude) << ", E"
        << est.depth + 1 << " = " << format_double(est.energy) << '\n';
  if (result.stopped_early) {
    err << "peel stopped early: " << result.diagnostic << '\n';
    return kPeelEarlyStop;
  }
  return kOk;
}

int cmd_sweep(const std::string& input, const FitFlags& f, const std::vector<std::string>& grid,
              const CommonOptions& c, std::ostream& out, std::ostream& err) {
  if (grid.empty()) throw UsageError("sweep needs at least one --grid specification");
  const std::vector<PriorSpec> specs = expand_grid(grid, f.resolved_priors());
  const CorrelatorDataset data = load_input(input, f);
  McmcConfig cfg = f.cfg;
  cfg.seed = c.seed;
  const TelescopeSchedule schedule = resolve_schedule(data, f);
  const SweepTable table = sensitivity_sweep(data, schedule, specs, cfg, f.options(c.threads));

  const fs::path dir = ensure_dir(c.out, "sweep_out");
  {
    std::ofstream os(dir / "sweep.csv");
    if (!os) throw DataError("cannot write " + (dir / "sweep.csv").string());
    echo_config(os, "sweep", cfg, f.resolved_priors());
    os << "# input = " << input << '\n';
    for (const auto& g : grid) os << "# grid = " << g << '\n';
    write_sweep_table(os, table);
  }
  for (const auto& cell : table.cells) {
    if (!cell.report) {
      err << "cell " << cell.index << " failed: " << cell.error << '\n';
      continue;
    }
    write_histograms(dir, "cell_" + std::to_string(cell.index) + "_", *cell.report, f.bins,
                     input + " (sweep cell " + std::to_string(cell.index) + ")");
    const auto& e1 = cell.report->summary(Parameter::E1);
    const auto& a1 = cell.report->summary(Parameter::A1);
    const auto& a2 = cell.report->summary(Parameter::A2);
    out << "cell " << cell.index << " [" << energy_prior_text(cell.priors) << ", alpha=" << format_double(cell.priors.alpha)
        << ", beta=" << format_double(cell.priors.beta) << "]: E1 mode " << format_double(e1.mode) << ", A1 mode "
        << format_double(a1.mode) << ", A2 mode " << format_double(a2.mode) << '\n';
  }
  return table.failures() == table.cells.size() ? kSamplerAbort : kOk;
}

int cmd_summarize(const std::string& input, int bins, double ci, const CommonOptions& c, std::ostream& out) {
  FitReport report = load_report(input);
  for (int p = 0; p < 4; ++p) report.summaries[p] = summarize_any(report.column(static_cast<Parameter>(p)), bins, ci);
  report.summary_bins = bins;
  report.ci_level = ci;
  print_summary(out, report);
  if (!c.out.empty()) {
    const fs::path dir = ensure_dir(c.out, "");
    write_histograms(dir, "", report, bins, input);
  }
  return kOk;
}

void apply_grid_value(PriorSpec& p, const std::string& key, const std::string& value) {
  if (key == "energy") {
    if (value == "gamma") {
      if (!std::holds_alternative<GammaPrior>(p.energy)) p.energy = GammaPrior{};
    } else if (value == "pareto") {
      if (!std::holds_alternative<ParetoPrior>(p.energy)) p.energy = ParetoPrior{};
    } else {
      throw InvalidArgument("grid: energy must be gamma or pareto, got '" + value + "'");
    }
    return;
  }
  double x = 0.0;
  std::size_t used = 0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw InvalidArgument("grid: '" + value + "' is not a number");

  if (key == "alpha") {
    p.alpha = x;
  } else if (key == "beta") {
    p.beta = x;
  } else if (key == "omega") {
    p.omega = x;
  } else if (key == "eta" || key == "lambda") {
    auto* g = std::get_if<GammaPrior>(&p.energy);
    if (!g) throw InvalidArgument("grid: " + key + " applies to the gamma energy prior only");
    (key == "eta" ? g->scale : g->shape) = x;
  } else if (key == "xmin" || key == "pareto_shape") {
    if (!std::holds_alternative<ParetoPrior>(p.energy)) p.energy = ParetoPrior{};
    auto& q = std::get<ParetoPrior>(p.energy);
    (key == "xmin" ? q.x_min : q.shape) = x;
  } else {
    throw InvalidArgument("grid: unknown key '" + key + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

std::vector<PriorSpec> expand_grid(const std::vector<std::string>& specs, const PriorSpec& base) {
  using Assignment = std::vector<std::pair<std::string, std::string>>;
  std::vector<std::vector<Assignment>> axes;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw InvalidArgument("grid: expected key=v1,v2,... in '" + spec + "'");
    const auto keys = split(spec.substr(0, eq), ':');
    std::vector<Assignment> axis;
    for (const auto& tuple : split(spec.substr(eq + 1), ',')) {
      const auto values = split(tuple, ':');
      if (values.size() != keys.size())
        throw InvalidArgument("grid: '" + tuple + "' does not match the keys of '" + spec + "'");
      Assignment a;
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (values[i].empty()) throw InvalidArgument("grid: empty value in '" + spec + "'");
        a.emplace_back(keys[i], values[i]);
      }
      // the prior family must be chosen before its parameters are set
      std::stable_partition(a.begin(), a.end(), [](const auto& kv) { return kv.first == "energy"; });
      axis.push_back(std::move(a));
    }
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw InvalidArgument("grid: no specifications");

  std::vector<PriorSpec> out{base};
  for (const auto& axis : axes) {
    std::vector<PriorSpec> next;
    for (const auto& p : out)
      for (const auto& a : axis) {
        PriorSpec q = p;
        for (const auto& [k, v] : a) apply_grid_value(q, k, v);
        q.validate();
        next.push_back(q);
      }
    out = std::move(next);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian multi-exponential decay fitting with telescoped truncation times", "telefit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file; [subcommand] sections hold that subcommand's flags");

  CommonOptions common;
  FitFlags fit_flags;

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset y_t = G(t) + noise");
  add_common(simulate, common, "Dataset file (stdout when omitted)");
  simulate->add_option("--A", sim.amplitudes, "Amplitudes A1,A2,...")->delimiter(',')->required();
  simulate->add_option("--E1", sim.e1, "Base energy")->required();
  simulate->add_option("--c", sim.c, "Energy spacing")->required();
  simulate->add_option("--tmax", sim.tmax, "Last time index")->capture_default_str();
  simulate->add_option("--noise", sim.noise, "sigma_t = noise * G(t) * t")->capture_default_str();
  simulate->add_option("--rho12", sim.rho12, "Correlation recorded in the dataset");
  simulate->add_flag("--emit-truth", sim.emit_truth, "Add the noise-free G(t) column");

  std::string input;
  auto* fit = app.add_subcommand("fit", "Three-phase particle MCMC fit of the leading mode");
  add_common(fit, common, "Report file");
  add_fit_flags(fit, fit_flags, true);
  fit->add_option("dataset", input, "Dataset file")->required();

  PeelFlags peel_flags;
  auto* peel = app.add_subcommand("peel", "Fit, subtract the leading mode and refit, level by level");
  add_common(peel, common, "Output directory (default peel_out)");
  add_fit_flags(peel, fit_flags, false);
  peel->add_option("dataset", input, "Dataset file")->required();
  peel->add_option("--depth", peel_flags.depth, "Number of subtractions")->capture_default_str();
  peel->add_option("--inflation", peel_flags.inflation, "sigma factor per subtraction")->capture_default_str();
  peel->add_option("--estimate", peel_flags.estimate, "mode or mean")->capture_default_str();
  peel->add_option("--noise-floor", peel_flags.noise_floor, "Usable points need y > floor * sigma")
      ->capture_default_str();

  std::vector<std::string> grid;
  auto* sweep = app.add_subcommand("sweep", "Refit over a grid of prior hyperparameters");
  add_common(sweep, common, "Output directory (default sweep_out)");
  add_fit_flags(sweep, fit_flags, true);
  sweep->add_option("dataset", input, "Dataset file")->required();
  sweep->add_option("--grid", grid, "key=v1,v2 or k1:k2=a1:b1,a2:b2; repeat for a cross product");

  int bins = 50;
  double ci = 0.95;
  auto* summarize = app.add_subcommand("summarize", "Re-summarize a report and write histograms");
  add_common(summarize, common, "Directory for per-parameter histograms");
  summarize->add_option("report", input, "Report file")->required();
  summarize->add_option("--bins", bins, "Histogram bins")->capture_default_str();
  summarize->add_option("--ci", ci, "Credible level")->capture_default_str();

  // --config belongs to the top-level app; hoist it so it may follow the subcommand
  std::vector<std::string> ordered;
  std::vector<std::string> hoisted;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0 && args[i] == "--config" && i + 1 < args.size()) {
      hoisted.insert(hoisted.end(), {args[i], args[i + 1]});
      ++i;
    } else if (i > 0 && args[i].starts_with("--config=")) {
      hoisted.push_back(args[i]);
    } else {
      ordered.push_back(args[i]);
    }
  }
  if (!ordered.empty()) ordered.insert(ordered.begin() + 1, hoisted.begin(), hoisted.end());
  std::vector<const char*> argv;
  for (const auto& a : ordered) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, common, out);
    if (fit->parsed()) return cmd_fit(input, fit_flags, common, out);
    if (peel->parsed()) return cmd_peel(input, fit_flags, peel_flags, common, out, err);
    if (sweep->parsed()) return cmd_sweep(input, fit_flags, grid, common, out, err);
    if (summarize->parsed()) return cmd_summarize(input, bins, ci, common, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DiscardAbort& e) {
    err << "aborted: " << e.what() << '\n';
    return kSamplerAbort;
  } catch (const SamplerError& e) {
    err << "sampler failure: " << e.what() << '\n';
    return kSamplerAbort;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace telefit::cli
