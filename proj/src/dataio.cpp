#include "telefit/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "telefit/error.hpp"

namespace telefit {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  if (line.find(',') != std::string::npos) {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
  } else {
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) out.push_back(f);
  }
  return out;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool parse_int(const std::string& s, int& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// "# key = value" -> (key, value)
std::optional<std::pair<std::string, std::string>> parse_comment_kv(const std::string& line) {
  std::string body = trim(std::string_view(line).substr(1));
  const auto eq = body.find('=');
  if (eq == std::string::npos) return std::nullopt;
  std::string key = trim(std::string_view(body).substr(0, eq));
  if (key.empty() || key.find(' ') != std::string::npos) return std::nullopt;
  return std::make_pair(key, trim(std::string_view(body).substr(eq + 1)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets

void CorrelatorDataset::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].t < 0) throw DataError("negative time t=" + std::to_string(points[i].t));
    if (!(points[i].sigma > 0.0)) throw DataError("non-positive sigma at t=" + std::to_string(points[i].t));
    if (i > 0 && points[i].t <= points[i - 1].t)
      throw DataError("times must be strictly increasing (t=" + std::to_string(points[i].t) + ")");
  }
  if (!(std::abs(rho12) < 1.0)) throw DataError("rho12 must satisfy |rho12| < 1");
}

bool CorrelatorDataset::has_time(int t) const {
  return std::any_of(points.begin(), points.end(), [t](const auto& p) { return p.t == t; });
}

const CorrelatorPoint& CorrelatorDataset::at_time(int t) const {
  for (const auto& p : points)
    if (p.t == t) return p;
  throw DataError("dataset has no observation at t=" + std::to_string(t));
}

CorrelatorDataset read_dataset(std::istream& is, const std::string& source) {
  CorrelatorDataset data;
  std::string line;
  int lineno = 0;
  int col_t = -1, col_y = -1, col_sigma = -1, col_lo = -1, col_hi = -1;
  bool have_header = false;
  auto fail = [&](const std::string& msg) -> DataError {
    return DataError(source + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      if (auto kv = parse_comment_kv(s)) {
        if (kv->first == "rho12") {
          if (!parse_real(kv->second, data.rho12)) throw fail("unparseable rho12 '" + kv->second + "'");
        } else {
          data.provenance[kv->first] = kv->second;
        }
      }
      continue;
    }
    const auto fields = split_fields(s);
    if (!have_header) {
      for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        const auto& name = fields[static_cast<std::size_t>(i)];
        if (name == "t") col_t = i;
        else if (name == "y") col_y = i;
        else if (name == "sigma") col_sigma = i;
        else if (name == "err_lo") col_lo = i;
        else if (name == "err_hi") col_hi = i;
      }
      if (col_t < 0 || col_y < 0) throw fail("header must name columns 't' and 'y'");
      if (col_sigma < 0 && (col_lo < 0 || col_hi < 0))
        throw fail("header must name 'sigma' or both 'err_lo' and 'err_hi'");
      have_header = true;
      continue;
    }
    const int needed = std::max({col_t, col_y, col_sigma, col_lo, col_hi}) + 1;
    if (static_cast<int>(fields.size()) < needed)
      throw fail("expected " + std::to_string(needed) + " columns, found " + std::to_string(fields.size()));
    CorrelatorPoint p;
    if (!parse_int(fields[static_cast<std::size_t>(col_t)], p.t) || p.t < 0)
      throw fail("unparseable time '" + fields[static_cast<std::size_t>(col_t)] + "'");
    if (!parse_real(fields[static_cast<std::size_t>(col_y)], p.y))
      throw fail("unparseable y '" + fields[static_cast<std::size_t>(col_y)] + "'");
    if (col_sigma >= 0) {
      if (!parse_real(fields[static_cast<std::size_t>(col_sigma)], p.sigma))
        throw fail("unparseable sigma '" + fields[static_cast<std::size_t>(col_sigma)] + "'");
    } else {
      double lo = 0.0, hi = 0.0;
      if (!parse_real(fields[static_cast<std::size_t>(col_lo)], lo) ||
          !parse_real(fields[static_cast<std::size_t>(col_hi)], hi))
        throw fail("unparseable error columns");
      p.sigma = (lo + hi) / 2.0;
    }
    if (!(p.sigma > 0.0)) throw fail("non-positive sigma at t=" + std::to_string(p.t));
    for (const auto& q : data.points)
      if (q.t == p.t) throw fail("duplicate t=" + std::to_string(p.t));
    data.points.push_back(p);
  }
  if (!have_header) throw DataError(source + ": missing header row");
  if (data.points.empty()) throw DataError(source + ": no data rows");
  if (col_sigma < 0) data.provenance["sigma_source"] = "mean(err_lo,err_hi) read as standard deviations";
  std::sort(data.points.begin(), data.points.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  data.validate();
  return data;
}

CorrelatorDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return read_dataset(in, path.string());
}

void write_dataset(std::ostream& os, const CorrelatorDataset& data, const std::vector<double>& truth) {
  if (!truth.empty() && truth.size() != data.points.size())
    throw InvalidArgument("truth column length does not match the dataset");
  for (const auto& [k, v] : data.provenance) os << "# " << k << " = " << v << '\n';
  if (data.rho12 != 0.0) os << "# rho12 = " << format_double(data.rho12) << '\n';
  os << "t,y,sigma" << (truth.empty() ? "" : ",truth") << '\n';
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto& p = data.points[i];
    os << p.t << ',' << format_double(p.y) << ',' << format_double(p.sigma);
    if (!truth.empty()) os << ',' << format_double(truth[i]);
    os << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const CorrelatorDataset& data, const std::vector<double>& truth) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_dataset(out, data, truth);
}

CorrelatorDataset simulate_dataset(const ExpSumParams& params, int t_max, double noise_coeff, std::uint64_t seed) {
  params.validate();
  if (t_max < 1) throw InvalidArgument("t_max must be at least 1");
  if (!(noise_coeff > 0.0)) throw InvalidArgument("noise coefficient must be positive");

  Rng rng(seed);
  CorrelatorDataset data;
  for (int t = 1; t <= t_max; ++t) {
    const double g = eval_correlator(params, t);
    const double sigma = noise_coeff * g * t;
    data.points.push_back({t, g + sigma * standard_normal(rng), sigma});
  }
  std::string amps;
  for (std::size_t n = 0; n < params.amplitudes.size(); ++n)
    amps += (n ? "," : "") + format_double(params.amplitudes[n]);
  data.provenance["generator"] = "simulate";
  data.provenance["amplitudes"] = amps;
  data.provenance["base_energy"] = format_double(params.base_energy);
  data.provenance["spacing"] = format_double(params.spacing);
  data.provenance["t_max"] = std::to_string(t_max);
  data.provenance["noise_coeff"] = format_double(noise_coeff);
  data.provenance["noise_model"] = "sigma_t = noise_coeff * G(t) * t";
  data.provenance["seed"] = std::to_string(seed);
  return data;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

using Section = std::vector<std::pair<std::string, std::string>>;

class ReportReader {
 public:
  ReportReader(std::istream& is, std::string source) : source_(std::move(source)) { parse(is); }

  const Section& section(const std::string& name) const {
    for (const auto& [n, s] : sections_)
      if (n == name) return s;
    throw DataError(source_ + ": missing section [" + name + "]");
  }

  std::string get(const std::string& sec, const std::string& key) const {
    for (const auto& [k, v] : section(sec))
      if (k == key) return v;
    throw DataError(source_ + ": missing key '" + key + "' in [" + sec + "]");
  }

  std::vector<std::string> get_all(const std::string& sec, const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : section(sec))
      if (k == key) out.push_back(v);
    return out;
  }

  double real(const std::string& sec, const std::string& key) const {
    double x = 0.0;
    const auto v = get(sec, key);
    if (!parse_real(v, x)) throw DataError(source_ + ": bad number '" + v + "' for " + key);
    return x;
  }

  long integer(const std::string& sec, const std::string& key) const {
    const auto v = get(sec, key);
    try {
      std::size_t pos = 0;
      const long x = std::stol(v, &pos);
      if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw DataError(source_ + ": bad integer '" + v + "' for " + key);
  }

  std::uint64_t unsigned_integer(const std::string& sec, const std::string& key) const {
    const auto v = get(sec, key);
    std::uint64_t x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      throw DataError(source_ + ": bad unsigned integer '" + v + "' for " + key);
    return x;
  }

  const std::vector<std::vector<std::string>>& particle_rows() const { return rows_; }
  const std::vector<std::string>& particle_header() const { return header_; }
  const std::string& source() const { return source_; }

 private:
  void parse(std::istream& is) {
    std::string line;
    std::string current;
    bool ended = false;
    bool version_seen = false;
    while (std::getline(is, line)) {
      const std::string s = trim(line);
      if (s.empty() || s.front() == '#') continue;
      if (s.front() == '[' && s.back() == ']') {
        current = s.substr(1, s.size() - 2);
        if (current == "end") {
          ended = true;
          break;
        }
        sections_.emplace_back(current, Section{});
        continue;
      }
      if (current.empty()) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || trim(s.substr(0, eq)) != "format_version")
          throw DataError(source_ + ": expected format_version before the first section");
        check_version(trim(s.substr(eq + 1)));
        version_seen = true;
        continue;
      }
      const auto eq = s.find('=');
      if (current == "particles" && (eq == std::string::npos)) {
        if (header_.empty()) header_ = split_fields(s);
        else rows_.push_back(split_fields(s));
        continue;
      }
      if (eq == std::string::npos) throw DataError(source_ + ": malformed line '" + s + "'");
      sections_.back().second.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    if (!version_seen) throw DataError(source_ + ": missing format_version");
    if (!ended) throw DataError(source_ + ": truncated report (no [end] marker)");
  }

  void check_version(const std::string& v) {
    int major = 0;
    const auto dot = v.find('.');
    if (!parse_int(v.substr(0, dot), major)) throw DataError(source_ + ": bad format_version '" + v + "'");
    if (major != FitReport::kFormatMajor)
      throw DataError(source_ + ": report format version " + v + " is not supported (this build reads " +
                      std::to_string(FitReport::kFormatMajor) + ".x)");
  }

  std::string source_;
  std::vector<std::pair<std::string, Section>> sections_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string join_times(const std::vector<int>& times) {
  std::string s;
  for (std::size_t i = 0; i < times.size(); ++i) s += (i ? "," : "") + std::to_string(times[i]);
  return s;
}

}  // namespace

void write_report(std::ostream& os, const FitReport& r) {
  const auto& c = r.config;
  const auto& obs = r.observations;
  os << "# telefit fit report\n"
     << "# priors: A_n ~ Beta(alpha, beta); E1 ~ Gamma(shape, scale) with mean shape*scale, or Pareto(x_min, shape);\n"
     << "#         c | E1 ~ Uniform(0, omega / E1)\n"
     << "format_version = " << FitReport::kFormatMajor << '.' << FitReport::kFormatMinor << "\n\n";

  os << "[config]\n"
     << "iters_phase1 = " << c.iters_phase1 << '\n'
     << "iters_phase2 = " << c.iters_phase2 << '\n'
     << "m = " << c.m << '\n'
     << "c0 = " << format_double(c.c0) << '\n'
     << "e1_0 = " << format_double(c.e1_0) << '\n'
     << "burn_in = " << c.burn_in << '\n'
     << "scale_amplitude = " << format_double(c.scales.amplitude) << '\n'
     << "scale_log_energy = " << format_double(c.scales.log_energy) << '\n'
     << "scale_log_spacing = " << format_double(c.scales.log_spacing) << '\n'
     << "scale_ridge_energy = " << format_double(c.scales.ridge_energy) << '\n'
     << "scale_ridge_spacing = " << format_double(c.scales.ridge_spacing) << '\n'
     << "discard_limit = " << format_double(c.discard_limit) << '\n'
     << "min_acceptance = " << format_double(c.min_acceptance) << '\n'
     << "max_failed_fraction = " << format_double(c.max_failed_fraction) << '\n'
     << "cycle_intermediate = " << (c.cycle_intermediate ? 1 : 0) << '\n'
     << "seed = " << c.seed << "\n\n";

  os << "[priors]\n"
     << "alpha = " << format_double(r.priors.alpha) << '\n'
     << "beta = " << format_double(r.priors.beta) << '\n'
     << "omega = " << format_double(r.priors.omega) << '\n';
  if (const auto* g = std::get_if<GammaPrior>(&r.priors.energy)) {
    os << "energy_family = gamma\n"
       << "gamma_scale = " << format_double(g->scale) << '\n'
       << "gamma_shape = " << format_double(g->shape) << '\n';
  } else {
    const auto& p = std::get<ParetoPrior>(r.priors.energy);
    os << "energy_family = pareto\n"
       << "pareto_x_min = " << format_double(p.x_min) << '\n'
       << "pareto_shape = " << format_double(p.shape) << '\n';
  }
  os << '\n';

  os << "[schedule]\n"
     << "rule = " << to_string(r.schedule.rule) << '\n'
     << "times = " << join_times(r.schedule.times) << '\n'
     << "provisional_spacing = " << format_double(r.schedule.provisional_spacing) << '\n'
     << "tolerance = " << format_double(r.schedule.tolerance) << '\n'
     << "t1 = " << obs.t1 << '\n'
     << "t2 = " << obs.t2 << '\n'
     << "y1 = " << format_double(obs.y1) << '\n'
     << "y2 = " << format_double(obs.y2) << '\n'
     << "sigma1 = " << format_double(obs.sigma1) << '\n'
     << "sigma2 = " << format_double(obs.sigma2) << '\n'
     << "rho12 = " << format_double(obs.rho12) << "\n\n";

  const bool weighted = !r.posterior.weights.empty();
  os << "[particles]\n"
     << "count = " << r.posterior.draws.size() << '\n'
     << "phase = " << (r.posterior.phase == Phase::PhaseI ? "I" : "II") << '\n'
     << "seed = " << r.posterior.seed << '\n'
     << "a1,e1,a2,c" << (weighted ? ",weight" : "") << '\n';
  for (std::size_t i = 0; i < r.posterior.draws.size(); ++i) {
    const auto& d = r.posterior.draws[i];
    os << format_double(d.a1) << ',' << format_double(d.e1) << ',' << format_double(d.a2) << ','
       << format_double(d.c);
    if (weighted) os << ',' << format_double(r.posterior.weights[i]);
    os << '\n';
  }
  os << '\n';

  os << "[summaries]\n"
     << "bins = " << r.summary_bins << '\n'
     << "ci_level = " << format_double(r.ci_level) << '\n'
     << "# parameter = mode mean ci_low ci_high bin_width degenerate\n";
  for (std::size_t p = 0; p < 4; ++p) {
    const auto& s = r.summaries[p];
    os << kParameterNames[p] << " = " << format_double(s.mode) << ' ' << format_double(s.mean) << ' '
       << format_double(s.ci_low) << ' ' << format_double(s.ci_high) << ' ' << format_double(s.bin_width) << ' '
       << (s.degenerate ? 1 : 0) << '\n';
  }
  os << '\n';

  os << "[diagnostics]\n"
     << "discard_count = " << r.discard_count << '\n'
     << "spacing_proposals = " << r.spacing_proposals << '\n'
     << "discard_fraction = " << format_double(r.discard_fraction) << '\n'
     << "failed_repetitions = " << r.failed_repetitions << '\n'
     << "acceptance_phase1 = " << format_double(r.acceptance_phase1) << '\n'
     << "acceptance_phase2 = " << format_double(r.acceptance_phase2) << '\n';
  for (const auto& n : r.notes) os << "note = " << n << '\n';
  os << "\n[end]\n";
}

FitReport read_report(std::istream& is, const std::string& source) {
  const ReportReader rd(is, source);
  FitReport r;

  auto& c = r.config;
  c.iters_phase1 = static_cast<int>(rd.integer("config", "iters_phase1"));
  c.iters_phase2 = static_cast<int>(rd.integer("config", "iters_phase2"));
  c.m = static_cast<int>(rd.integer("config", "m"));
  c.c0 = rd.real("config", "c0");
  c.e1_0 = rd.real("config", "e1_0");
  c.burn_in = static_cast<int>(rd.integer("config", "burn_in"));
  c.scales.amplitude = rd.real("config", "scale_amplitude");
  c.scales.log_energy = rd.real("config", "scale_log_energy");
  c.scales.log_spacing = rd.real("config", "scale_log_spacing");
  c.scales.ridge_energy = rd.real("config", "scale_ridge_energy");
  c.scales.ridge_spacing = rd.real("config", "scale_ridge_spacing");
  c.discard_limit = rd.real("config", "discard_limit");
  c.min_acceptance = rd.real("config", "min_acceptance");
  c.max_failed_fraction = rd.real("config", "max_failed_fraction");
  c.cycle_intermediate = rd.integer("config", "cycle_intermediate") != 0;
  c.seed = rd.unsigned_integer("config", "seed");

  r.priors.alpha = rd.real("priors", "alpha");
  r.priors.beta = rd.real("priors", "beta");
  r.priors.omega = rd.real("priors", "omega");
  const auto family = rd.get("priors", "energy_family");
  if (family == "gamma") {
    r.priors.energy = GammaPrior{rd.real("priors", "gamma_scale"), rd.real("priors", "gamma_shape")};
  } else if (family == "pareto") {
    r.priors.energy = ParetoPrior{rd.real("priors", "pareto_x_min"), rd.real("priors", "pareto_shape")};
  } else {
    throw DataError(source + ": unknown energy_family '" + family + "'");
  }

  r.schedule.rule = truncation_rule_from_string(rd.get("schedule", "rule"));
  for (const auto& f : split_fields(rd.get("schedule", "times"))) {
    int t = 0;
    if (!parse_int(f, t)) throw DataError(source + ": bad schedule time '" + f + "'");
    r.schedule.times.push_back(t);
  }
  r.schedule.provisional_spacing = rd.real("schedule", "provisional_spacing");
  r.schedule.tolerance = rd.real("schedule", "tolerance");
  auto& obs = r.observations;
  obs.t1 = static_cast<int>(rd.integer("schedule", "t1"));
  obs.t2 = static_cast<int>(rd.integer("schedule", "t2"));
  obs.y1 = rd.real("schedule", "y1");
  obs.y2 = rd.real("schedule", "y2");
  obs.sigma1 = rd.real("schedule", "sigma1");
  obs.sigma2 = rd.real("schedule", "sigma2");
  obs.rho12 = rd.real("schedule", "rho12");

  const auto count = static_cast<std::size_t>(rd.integer("particles", "count"));
  const auto phase = rd.get("particles", "phase");
  r.posterior.phase = phase == "I" ? Phase::PhaseI : Phase::PhaseII;
  r.posterior.seed = rd.unsigned_integer("particles", "seed");
  const auto& header = rd.particle_header();
  const bool weighted = header.size() == 5;
  if (!(header.size() == 4 || weighted)) throw DataError(source + ": bad particle header");
  const auto& rows = rd.particle_rows();
  if (rows.size() != count)
    throw DataError(source + ": truncated particle list (" + std::to_string(rows.size()) + " of " +
                    std::to_string(count) + " rows)");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size()) throw DataError(source + ": particle row " + std::to_string(i + 1) + " is short");
    double v[5] = {};
    for (std::size_t k = 0; k < row.size(); ++k)
      if (!parse_real(row[k], v[k]))
        throw DataError(source + ": bad particle value '" + row[k] + "' in row " + std::to_string(i + 1));
    r.posterior.draws.push_back({v[0], v[1], v[2], v[3]});
    if (weighted) r.posterior.weights.push_back(v[4]);
  }

  r.summary_bins = static_cast<int>(rd.integer("summaries", "bins"));
  r.ci_level = rd.real("summaries", "ci_level");
  for (std::size_t p = 0; p < 4; ++p) {
    std::istringstream ss(rd.get("summaries", kParameterNames[p]));
    std::string f[6];
    for (auto& x : f) ss >> x;
    auto& s = r.summaries[p];
    if (!parse_real(f[0], s.mode) || !parse_real(f[1], s.mean) || !parse_real(f[2], s.ci_low) ||
        !parse_real(f[3], s.ci_high) || !parse_real(f[4], s.bin_width) || (f[5] != "0" && f[5] != "1"))
      throw DataError(source + ": bad summary line for " + kParameterNames[p]);
    s.degenerate = f[5] == "1";
  }

  r.discard_count = rd.integer("diagnostics", "discard_count");
  r.spacing_proposals = rd.integer("diagnostics", "spacing_proposals");
  r.discard_fraction = rd.real("diagnostics", "discard_fraction");
  r.failed_repetitions = static_cast<int>(rd.integer("diagnostics", "failed_repetitions"));
  r.acceptance_phase1 = rd.real("diagnostics", "acceptance_phase1");
  r.acceptance_phase2 = rd.real("diagnostics", "acceptance_phase2");
  r.notes = rd.get_all("diagnostics", "note");
  return r;
}

void save_report(const FitReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_report(out, report);
}

FitReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path.string());
  return read_report(in, path.string());
}

}  // namespace telefit
