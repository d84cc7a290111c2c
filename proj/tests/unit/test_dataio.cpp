#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "telefit/dataio.hpp"
#include "telefit/error.hpp"

using namespace telefit;

namespace {

CorrelatorDataset parse(const std::string& text) {
  std::istringstream is(text);
  return read_dataset(is, "mem");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

const ExpSumParams kTable{{0.8, 0.6, 0.4, 0.2, 0.1}, 0.9, 0.5};

FitReport small_report(std::uint64_t seed, int m = 30) {
  const auto data = simulate_dataset(kTable, 12, 0.001, 7);
  McmcConfig cfg;
  cfg.iters_phase1 = 200;
  cfg.iters_phase2 = 200;
  cfg.burn_in = 20;
  cfg.m = m;
  cfg.seed = seed;
  return phase3(data, select_times(data.points, 2), PriorSpec{}, cfg);
}

}  // namespace

TEST_CASE("two error columns are averaged into sigma") {
  const auto d = parse("t, y, err_lo, err_hi\n8, 0.0004358, 6.6393E-06, 6.8252E-06\n");
  REQUIRE(d.points.size() == 1);
  CHECK(d.points[0].t == 8);
  CHECK(d.points[0].y == 4.358e-4);
  CHECK(d.points[0].sigma == doctest::Approx(6.73225e-6).epsilon(1e-12));
  CHECK(d.provenance.count("sigma_source") == 1);
}

TEST_CASE("the pion file loads") {
  const auto d = load_dataset(std::string(TELEFIT_TEST_DATA) + "/pion.csv");
  REQUIRE(d.points.size() == 12);
  CHECK(d.points.front().t == 2);
  CHECK(d.points.back().t == 13);
  CHECK(d.at_time(8).sigma == doctest::Approx(6.73225e-6).epsilon(1e-12));
  CHECK(d.at_time(13).y == 3.54336e-5);
  CHECK(d.rho12 == 0.0);
}

TEST_CASE("single sigma column, whitespace delimiters, extra columns") {
  const auto d = parse("# rho12 = 0.25\n# origin = hand typed\nt y sigma note\n6 0.00377058 2.25e-5 x\n1 0.5 0.1 y\n");
  REQUIRE(d.points.size() == 2);
  CHECK(d.points[0].t == 1);  // rows are sorted by t
  CHECK(d.points[1].y == 0.00377058);
  CHECK(d.rho12 == 0.25);
  CHECK(d.provenance.at("origin") == "hand typed");
}

TEST_CASE("one-sigma and two-error files with equal sigma load identically") {
  auto a = parse("t,y,sigma\n3,0.5,0.02\n4,0.25,0.01\n");
  auto b = parse("t,y,err_lo,err_hi\n3,0.5,0.02,0.02\n4,0.25,0.01,0.01\n");
  CHECK(a.points == b.points);
  CHECK(a.rho12 == b.rho12);
}

TEST_CASE("row-numbered diagnostics") {
  const auto dup = error_of("t,y,sigma\n3,0.5,0.1\n3,0.4,0.1\n");
  CHECK(dup.find("duplicate t=3") != std::string::npos);
  CHECK(dup.find("mem:3") != std::string::npos);
  CHECK(error_of("t,y,sigma\n3,0.5,0\n").find("non-positive sigma") != std::string::npos);
  CHECK(error_of("t,y,sigma\n3,0.5,-1\n").find("mem:2") != std::string::npos);
  CHECK(error_of("t,y,sigma\n3,abc,0.1\n").find("unparseable y") != std::string::npos);
  CHECK(error_of("t,y,sigma\n3.5,0.2,0.1\n").find("unparseable time") != std::string::npos);
  CHECK(error_of("t,y,sigma\n3,0.2\n").find("columns") != std::string::npos);
  CHECK(error_of("t,y\n3,0.2\n").find("header") != std::string::npos);
  CHECK(error_of("# only comments\n").find("missing header") != std::string::npos);
  CHECK(error_of("t,y,sigma\n").find("no data rows") != std::string::npos);
  CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv"), DataError);
}

TEST_CASE("dataset write/read round trip") {
  auto d = simulate_dataset(kTable, 12, 0.001, 3);
  d.rho12 = 0.125;
  std::ostringstream os;
  write_dataset(os, d);
  const auto back = parse(os.str());
  CHECK(back.points == d.points);
  CHECK(back.rho12 == d.rho12);
  CHECK(back.provenance == d.provenance);
}

TEST_CASE("simulate_dataset") {
  const auto d = simulate_dataset(kTable, 12, 0.001, 99);
  REQUIRE(d.points.size() == 12);
  for (const auto& p : d.points) {
    const double g = eval_correlator(kTable, p.t);
    CHECK(p.sigma == doctest::Approx(0.001 * g * p.t).epsilon(1e-14));
    CHECK(std::abs(p.y - g) < 5 * p.sigma);
  }
  CHECK(d.points[0].sigma == doctest::Approx(0.001 * eval_correlator(kTable, 1)).epsilon(1e-15));
  CHECK(d.provenance.at("seed") == "99");

  const auto quiet = simulate_dataset(kTable, 12, 1e-15, 1);
  for (const auto& p : quiet.points) CHECK(p.y == doctest::Approx(eval_correlator(kTable, p.t)).epsilon(1e-12));

  CHECK(simulate_dataset(kTable, 12, 0.001, 5).points == simulate_dataset(kTable, 12, 0.001, 5).points);
  CHECK_FALSE(simulate_dataset(kTable, 12, 0.001, 5).points == simulate_dataset(kTable, 12, 0.001, 6).points);
  CHECK_THROWS_AS(simulate_dataset(kTable, 0, 0.001, 5), InvalidArgument);
  CHECK_THROWS_AS(simulate_dataset(kTable, 12, 0.0, 5), InvalidArgument);
}

TEST_CASE("report round trip is exact") {
  const auto r = small_report(4);
  std::ostringstream os;
  write_report(os, r);
  std::istringstream is(os.str());
  const auto back = read_report(is);
  CHECK(back == r);
  REQUIRE(back.posterior.draws.size() == r.posterior.draws.size());
  for (std::size_t i = 0; i < r.posterior.draws.size(); ++i) CHECK(back.posterior.draws[i] == r.posterior.draws[i]);

  // a second save of the reloaded report is byte-identical
  std::ostringstream again;
  write_report(again, back);
  CHECK(again.str() == os.str());
}

TEST_CASE("report with weights and a 1000-particle cloud") {
  FitReport r = small_report(5, 10);
  r.posterior.draws.resize(1000);
  for (std::size_t i = 0; i < 1000; ++i)
    r.posterior.draws[i] = Particle{0.5 + 1e-4 * i, 0.9 - 1e-5 * i, 1.0 / (i + 3), 0.1 + i / 3.0};
  r.posterior.weights.assign(1000, 1.0 / 1000);
  const auto path = std::filesystem::temp_directory_path() / "telefit_test_1000.report";
  save_report(r, path);
  const auto back = load_report(path);
  std::filesystem::remove(path);
  CHECK(back == r);
  CHECK(back.posterior.draws.size() == 1000);
  CHECK(back.posterior.draws[999] == r.posterior.draws[999]);
}

TEST_CASE("report version and truncation errors") {
  const auto r = small_report(6, 10);
  std::ostringstream os;
  write_report(os, r);
  const std::string text = os.str();

  auto read_text = [](const std::string& s) {
    std::istringstream is(s);
    return read_report(is, "mem");
  };
  std::string newer = text;
  newer.replace(newer.find("format_version = 1.0"), 20, "format_version = 2.0");
  try {
    read_text(newer);
    FAIL("newer major version accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  std::string minor = text;
  minor.replace(minor.find("format_version = 1.0"), 20, "format_version = 1.7");
  CHECK(read_text(minor) == r);

  const std::string cut = text.substr(0, text.find("[summaries]"));
  try {
    read_text(cut);
    FAIL("truncated report accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
  CHECK_THROWS_AS(load_report("/nonexistent/r.report"), DataError);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 6.73225e-6, 1e-300, 123456789.125, -2.5})
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
}
