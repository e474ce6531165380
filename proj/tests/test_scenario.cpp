#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slmsim/scenario.hpp"

using namespace slmsim;

namespace {

std::string table_to_string(const ResultTable& t, TableFormat f) {
  std::ostringstream os;
  write_table(t, os, f);
  return os.str();
}

}  // namespace

TEST_CASE("parse_quantity: unit suffixes") {
  CHECK(parse_quantity("493 nm", Dimension::Length) == doctest::Approx(493e-9));
  CHECK(parse_quantity("12.5 um", Dimension::Length) == doctest::Approx(12.5e-6));
  CHECK(parse_quantity("0.1 m", Dimension::Length) == doctest::Approx(0.1));
  CHECK(parse_quantity("3 kHz", Dimension::Frequency) == doctest::Approx(3000.0));
  CHECK(parse_quantity("1 MHz", Dimension::AngularFrequency) ==
        doctest::Approx(kTwoPi * 1e6));
  CHECK(parse_quantity("2.5 rad/s", Dimension::AngularFrequency) == doctest::Approx(2.5));
  CHECK(parse_quantity("0.6 mK", Dimension::Temperature) == doctest::Approx(0.6e-3));
  CHECK(parse_quantity("138 amu", Dimension::Mass) ==
        doctest::Approx(138.0 * kAtomicMassUnit));
  CHECK(parse_quantity("90 deg", Dimension::Angle) == doctest::Approx(kPi / 2));
  CHECK(parse_quantity("1 pi", Dimension::Angle) == doctest::Approx(kPi));
  CHECK(parse_quantity("0.33 ns", Dimension::Time) == doctest::Approx(0.33e-9));
  CHECK(parse_quantity("42", Dimension::Dimensionless) == 42.0);
  CHECK_THROWS_AS(parse_quantity("10 furlongs", Dimension::Length), std::invalid_argument);
  CHECK_THROWS_AS(parse_quantity("nm", Dimension::Length), std::invalid_argument);
}

TEST_CASE("parse_scenario: minimal file gets every documented default") {
  Scenario s = parse_scenario(
      R"({"optics": {"wavelength": "493 nm", "numerical_aperture": 0.6}})", "minimal");
  CHECK(s.train.wavelength() == doctest::Approx(493e-9));
  CHECK(s.train.numerical_aperture() == doctest::Approx(0.6));
  CHECK(s.train.slm_reflectivity() == doctest::Approx(0.83));
  CHECK(s.train.path_transmission() == doctest::Approx(0.08));
  CHECK(s.train.roundtrip_phase() == doctest::Approx(kPi));
  CHECK(s.grid.nx == 512);
  CHECK(s.grid.dx == doctest::Approx(40e-6 / 512));
  CHECK(s.chain.count() == 3);
  // psf width defaults to the diffraction limit lambda / 2 NA
  CHECK(s.chain.psf_width == doctest::Approx(493e-9 / 1.2));
  CHECK(s.slm.px == 1272);
  CHECK(s.slm.py == 1024);
  CHECK(s.slm.pitch == doctest::Approx(12.5e-6));
  CHECK(s.slm.levels == 0);
  CHECK(s.drive.half_linewidth == doctest::Approx(1.0));
  CHECK(s.drive.rabi == doctest::Approx(0.5));
  CHECK(s.thermal.trap_frequency == doctest::Approx(kTwoPi * 1e6));
  CHECK(s.thermal.mass == doctest::Approx(138.0 * kAtomicMassUnit));
  CHECK(s.protocol.n_ions == 2);
  CHECK(s.protocol.budget.rho == doctest::Approx(0.07));
  CHECK(s.protocol.budget.duty_cycle_hz == doctest::Approx(3000.0));
  CHECK(s.seed == 20250809ULL);
  CHECK_FALSE(s.scan.has_value());
}

TEST_CASE("parse_scenario: fidelity-scan setup matches the published axes") {
  Scenario s = parse_scenario(R"({
    "protocol": {"ions": 4, "rho": 1.0},
    "scan": {"pipeline": "entangle", "variable": "p",
             "from": 1e-4, "to": 0.1, "points": 200, "spacing": "log"}
  })",
                              "fig3");
  REQUIRE(s.scan.has_value());
  CHECK(s.scan->pipeline == "entangle");
  CHECK(s.scan->variable == "p");
  CHECK(s.scan->from == doctest::Approx(1e-4));
  CHECK(s.scan->to == doctest::Approx(0.1));
  CHECK(s.scan->log_spacing);
  CHECK(s.protocol.n_ions == 4);
}

TEST_CASE("parse_scenario: violations are collected, not truncated") {
  try {
    parse_scenario(R"({
      "optics": {"numerical_aperture": 1.7},
      "protocol": {"p": 1.5},
      "typo_section": {},
      "drive": {"rabi": -2}
    })",
                   "broken");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& issues = e.issues();
    auto contains = [&](const std::string& needle) {
      for (const auto& i : issues)
        if (i.find(needle) != std::string::npos) return true;
      return false;
    };
    CHECK(issues.size() >= 4);
    CHECK(contains("optics.numerical_aperture"));
    CHECK(contains("protocol.p"));
    CHECK(contains("typo_section"));
    CHECK(contains("drive.rabi"));
  }
}

TEST_CASE("parse_scenario: gamma-relative drive units") {
  Scenario s = parse_scenario(R"({
    "drive": {"half_linewidth": "2 rad/s", "rabi": "0.8 gamma", "detuning": "5 gamma"}
  })",
                              "drive");
  CHECK(s.drive.half_linewidth == doctest::Approx(2.0));
  CHECK(s.drive.rabi == doctest::Approx(1.6));
  CHECK(s.drive.detuning == doctest::Approx(10.0));
}

TEST_CASE("parse_scenario: bad json and unsupported scans") {
  CHECK_THROWS_AS(parse_scenario("{not json", "x"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"scan": {"pipeline": "entangle", "variable": "psi",
    "from": 0, "to": 1, "points": 3}})",
                                 "x"),
                  ConfigError);
}

TEST_CASE("run_scan: entangle pipeline reproduces the closed forms") {
  Scenario s = parse_scenario(R"({
    "protocol": {"ions": 2, "rho": 1.0, "duty_cycle": "3 kHz"},
    "scan": {"pipeline": "entangle", "variable": "p",
             "from": 1e-4, "to": 0.1, "points": 50, "spacing": "log"}
  })",
                              "fid2");
  ScanResult res = run_scan(s);
  CHECK(res.failures.empty());
  REQUIRE(res.table.row_count() == 50);
  CHECK(res.table.columns() ==
        std::vector<std::string>{"p", "fidelity", "p_succ", "rate"});
  for (size_t i = 0; i < res.table.row_count(); ++i) {
    const double p = res.table.at(i, 0);
    CHECK(res.table.at(i, 1) == doctest::Approx(herald_fidelity(2, p)).epsilon(1e-12));
    CHECK(res.table.at(i, 2) ==
          doctest::Approx(success_probability(2, p, {1.0, 3000.0})).epsilon(1e-12));
  }
  // log spacing endpoints
  CHECK(res.table.at(0, 0) == doctest::Approx(1e-4));
  CHECK(res.table.at(49, 0) == doctest::Approx(0.1));
}

TEST_CASE("run_scan: empty range yields an empty table, not an error") {
  Scenario s = parse_scenario(R"({
    "scan": {"pipeline": "entangle", "variable": "p", "from": 0.01, "to": 0.1, "points": 0}
  })",
                              "empty");
  ScanResult res = run_scan(s);
  CHECK(res.table.row_count() == 0);
  CHECK(res.failures.empty());
  CHECK(res.table.columns().size() == 4);
}

TEST_CASE("run_scan: per-point failures are recorded and the scan continues") {
  // p runs past 1: points beyond the domain fail, the rest survive
  Scenario s = parse_scenario(R"({
    "scan": {"pipeline": "entangle", "variable": "p", "from": 0.5, "to": 1.5, "points": 11}
  })",
                              "partial");
  ScanResult res = run_scan(s);
  CHECK(res.table.row_count() + res.failures.size() == 11);
  CHECK(!res.failures.empty());
  CHECK(res.table.row_count() >= 5);
  for (const auto& f : res.failures) CHECK(f.value > 1.0 - 1e-12);
}

TEST_CASE("run_scan: deterministic and independent of the job count") {
  const char* text = R"({
    "seed": 77,
    "scan": {"pipeline": "motion", "variable": "temperature_mK",
             "from": 0.0, "to": 0.6, "points": 13}
  })";
  Scenario s = parse_scenario(text, "motion");
  ScanResult serial = run_scan(s, 1);
  ScanResult parallel = run_scan(s, 4);
  CHECK(serial.failures.empty());
  const std::string a = table_to_string(serial.table, TableFormat::Dat);
  const std::string b = table_to_string(parallel.table, TableFormat::Dat);
  CHECK(a == b);

  // rerun from scratch: byte-identical
  ScanResult again = run_scan(parse_scenario(text, "motion"), 2);
  CHECK(table_to_string(again.table, TableFormat::Dat) == a);

  // a different seed moves the Monte Carlo column
  Scenario s2 = parse_scenario(text, "motion");
  s2.seed = 78;
  ScanResult other = run_scan(s2, 1);
  CHECK(table_to_string(other.table, TableFormat::Dat) != a);
}

TEST_CASE("run_scan: coeffs pipelines") {
  Scenario s = parse_scenario(R"({
    "drive": {"half_linewidth": 1.0, "detuning": "0 gamma"},
    "scan": {"pipeline": "coeffs", "variable": "rabi_over_gamma",
             "from": 0.0, "to": 10.0, "points": 21}
  })",
                              "c1scan");
  ScanResult res = run_scan(s);
  CHECK(res.failures.empty());
  // C1 at Omega = gamma is 1/18; x = 1 is row 2
  CHECK(res.table.at(2, 0) == doctest::Approx(1.0));
  CHECK(res.table.at(2, 1) == doctest::Approx(1.0 / 18.0).epsilon(1e-12));

  Scenario s2 = parse_scenario(R"({
    "drive": {"half_linewidth": 1.0, "rabi": "0.5 gamma"},
    "scan": {"pipeline": "coeffs", "variable": "tau_gamma",
             "from": 0.01, "to": 0.9, "points": 30, "spacing": "log"}
  })",
                               "c2scan");
  ScanResult res2 = run_scan(s2);
  CHECK(res2.failures.empty());
  REQUIRE(res2.table.row_count() == 30);
  // columns: tau_gamma, re, im, abs
  for (size_t i = 0; i < res2.table.row_count(); ++i) {
    const double re = res2.table.at(i, 1), im = res2.table.at(i, 2), ab = res2.table.at(i, 3);
    CHECK(std::hypot(re, im) == doctest::Approx(ab).epsilon(1e-12));
  }
}

TEST_CASE("write_table: dat format matches the skip-first-line convention") {
  ResultTable t({"p", "fidelity"});
  t.set_provenance("scenario=demo hash=00 seed=1");
  t.add_row({0.01, 0.994974874});
  t.add_row({0.02, 0.989898});
  std::ostringstream os;
  write_table(t, os, TableFormat::Dat);
  const std::string text = os.str();
  CHECK(text.substr(0, 1) == "#");
  CHECK(text.find("p fidelity") != std::string::npos);
  // exactly one header line followed by data rows
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  // round trip through a file
  const std::string path = (std::filesystem::temp_directory_path() / "slmsim_t.dat").string();
  write_table(t, path, TableFormat::Dat);
  ResultTable back = read_table(path);
  REQUIRE(back.row_count() == 2);
  CHECK(back.at(0, 0) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(back.at(1, 1) == doctest::Approx(0.989898).epsilon(1e-10));
  std::remove(path.c_str());
}

TEST_CASE("write_table: csv quoting protects commas") {
  ResultTable t({"x", "note,with,commas"});
  t.set_provenance("run, zeroth");
  t.add_row({1.0, 2.0});
  std::ostringstream os;
  write_table(t, os, TableFormat::Csv);
  const std::string text = os.str();
  CHECK(text.find("\"note,with,commas\"") != std::string::npos);
  CHECK(text.find("\"run, zeroth\"") != std::string::npos);
}

TEST_CASE("format_double: ten significant digits, deterministic") {
  CHECK(format_double(0.994974874371) == "0.9949748744");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(19.949999999) == "19.95");
}

TEST_CASE("bundled scenarios parse and cover every figure family") {
  const auto& bundle = bundled_scenarios();
  CHECK(bundle.size() >= 10);
  bool has_fid = false, has_c1 = false, has_c2 = false, has_c3 = false, has_supp = false;
  for (const auto& b : bundle) {
    Scenario s = parse_scenario(b.json, b.name);  // must not throw
    REQUIRE(s.scan.has_value());
    for (const auto& out : b.outputs) {
      if (out.filename.rfind("fidelity", 0) == 0) has_fid = true;
      if (out.filename.rfind("c1_", 0) == 0) has_c1 = true;
      if (out.filename.rfind("c2_", 0) == 0) has_c2 = true;
      if (out.filename.rfind("c3_", 0) == 0) has_c3 = true;
      if (out.filename.rfind("suppression", 0) == 0) has_supp = true;
    }
  }
  CHECK(has_fid);
  CHECK(has_c1);
  CHECK(has_c2);
  CHECK(has_c3);
  CHECK(has_supp);
}

TEST_CASE("field pipeline: suppression scan traces |1 + rho e^{i psi}|^2") {
  Scenario s = parse_scenario(R"({
    "optics": {"slm_reflectivity": 1.0, "path_transmission": 1.0},
    "grid": {"n": 128, "half_extent": "10 um"},
    "chain": {"count": 2, "spacing": "3 um"},
    "scan": {"pipeline": "field", "variable": "psi", "from": 0.0,
             "to": 6.283185307179586, "points": 9}
  })",
                              "supp");
  ScanResult res = run_scan(s);
  REQUIRE(res.failures.empty());
  for (size_t i = 0; i < res.table.row_count(); ++i) {
    const double psi = res.table.at(i, 0);
    const double expected = std::norm(1.0 + std::polar(1.0, psi));
    CHECK(res.table.at(i, 1) == doctest::Approx(expected).epsilon(1e-6));
  }
}
