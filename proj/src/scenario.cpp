#include "slmsim/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "slmsim/optics.hpp"

namespace slmsim {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

struct UnitEntry {
  const char* suffix;
  double factor;
};

const std::vector<UnitEntry>& unit_table(Dimension dim) {
  static const std::vector<UnitEntry> length{{"m", 1.0},  {"mm", 1e-3}, {"um", 1e-6},
                                             {"µm", 1e-6}, {"nm", 1e-9}};
  static const std::vector<UnitEntry> freq{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::vector<UnitEntry> angfreq{{"rad/s", 1.0},      {"Hz", kTwoPi},
                                              {"kHz", kTwoPi * 1e3}, {"MHz", kTwoPi * 1e6},
                                              {"GHz", kTwoPi * 1e9}};
  static const std::vector<UnitEntry> temp{{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"µK", 1e-6}};
  static const std::vector<UnitEntry> mass{{"kg", 1.0}, {"amu", kAtomicMassUnit}, {"u", kAtomicMassUnit}};
  static const std::vector<UnitEntry> angle{{"rad", 1.0}, {"deg", kPi / 180.0}, {"pi", kPi}};
  static const std::vector<UnitEntry> time{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"µs", 1e-6}, {"ns", 1e-9}};
  static const std::vector<UnitEntry> none{};
  switch (dim) {
    case Dimension::Length: return length;
    case Dimension::Frequency: return freq;
    case Dimension::AngularFrequency: return angfreq;
    case Dimension::Temperature: return temp;
    case Dimension::Mass: return mass;
    case Dimension::Angle: return angle;
    case Dimension::Time: return time;
    case Dimension::Dimensionless: return none;
  }
  return none;
}

const char* dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::Length: return "length";
    case Dimension::Frequency: return "frequency";
    case Dimension::AngularFrequency: return "angular frequency";
    case Dimension::Temperature: return "temperature";
    case Dimension::Mass: return "mass";
    case Dimension::Angle: return "angle";
    case Dimension::Time: return "time";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "?";
}

}  // namespace

double parse_quantity(const std::string& text, Dimension dim) {
  const std::string t = trim(text);
  if (t.empty()) throw std::invalid_argument("empty quantity");
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end == t.c_str()) throw std::invalid_argument("no number in quantity '" + text + "'");
  const std::string suffix = trim(std::string(end));
  if (suffix.empty()) return value;
  for (const auto& u : unit_table(dim))
    if (suffix == u.suffix) return value * u.factor;
  throw std::invalid_argument("unknown " + std::string(dimension_name(dim)) + " unit '" + suffix +
                              "' in '" + text + "'");
}

std::string Scenario::provenance() const {
  std::ostringstream os;
  os << "scenario=" << name << " hash=" << source_hash << " seed=" << seed;
  return os.str();
}

uint64_t point_seed(uint64_t scenario_seed, int point_index) {
  // splitmix64 over the combined stream id
  uint64_t z = scenario_seed + 0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(point_index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Collects validation problems; each issue names the offending key.
struct Issues {
  std::vector<std::string> list;
  void add(const std::string& key, const std::string& what) { list.push_back(key + ": " + what); }
  void raise_if_any() const {
    if (!list.empty()) throw ConfigError(list);
  }
};

void check_known_keys(const json& obj, const std::string& section,
                      std::initializer_list<const char*> allowed, Issues& issues) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) issues.add(section + "." + it.key(), "unknown key");
  }
}

double get_quantity(const json& obj, const std::string& section, const char* key, Dimension dim,
                    double fallback, Issues& issues) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_quantity(v.get<std::string>(), dim);
    issues.add(section + "." + key, "expected a number or unit string");
  } catch (const std::exception& e) {
    issues.add(section + "." + key, e.what());
  }
  return fallback;
}

/// Drive amplitudes accept a "gamma" suffix (relative to the half linewidth)
/// on top of the angular-frequency units.
double get_drive_quantity(const json& obj, const std::string& section, const char* key,
                          double gamma, double fallback, Issues& issues) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_string()) {
    std::string t = trim(v.get<std::string>());
    if (t.size() > 5 && t.substr(t.size() - 5) == "gamma") {
      try {
        return gamma * std::stod(t.substr(0, t.size() - 5));
      } catch (const std::exception&) {
        issues.add(section + "." + key, "bad gamma-relative value '" + t + "'");
        return fallback;
      }
    }
  }
  return get_quantity(obj, section, key, Dimension::AngularFrequency, fallback, issues);
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("parse error: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"scenario root must be a JSON object"});

  Issues issues;
  Scenario s;
  s.name = root.value("name", name);
  s.source_hash = hex16(fnv1a(json_text));

  check_known_keys(root, "scenario",
                   {"name", "optics", "grid", "chain", "slm", "drive", "thermal", "protocol",
                    "scan", "seed"},
                   issues);

  // ---- optics ----------------------------------------------------------
  double wavelength = 493e-9, na = 0.6, f1 = 13.25e-3, f2 = 0.1, f3 = 0.3;
  double eps1 = 0.83, eps2 = 0.08, psi = kPi;
  if (root.contains("optics")) {
    const auto& o = root.at("optics");
    check_known_keys(o, "optics",
                     {"wavelength", "numerical_aperture", "f1", "f2", "f3", "slm_reflectivity",
                      "path_transmission", "roundtrip_phase"},
                     issues);
    wavelength = get_quantity(o, "optics", "wavelength", Dimension::Length, wavelength, issues);
    na = get_quantity(o, "optics", "numerical_aperture", Dimension::Dimensionless, na, issues);
    f1 = get_quantity(o, "optics", "f1", Dimension::Length, f1, issues);
    f2 = get_quantity(o, "optics", "f2", Dimension::Length, f2, issues);
    f3 = get_quantity(o, "optics", "f3", Dimension::Length, f3, issues);
    eps1 = get_quantity(o, "optics", "slm_reflectivity", Dimension::Dimensionless, eps1, issues);
    eps2 = get_quantity(o, "optics", "path_transmission", Dimension::Dimensionless, eps2, issues);
    psi = get_quantity(o, "optics", "roundtrip_phase", Dimension::Angle, psi, issues);
  }
  if (!(wavelength > 0.0)) issues.add("optics.wavelength", "must be positive");
  if (!(na > 0.0 && na < 1.0)) issues.add("optics.numerical_aperture", "must lie in (0, 1)");
  if (eps1 < 0.0 || eps1 > 1.0) issues.add("optics.slm_reflectivity", "must lie in [0, 1]");
  if (eps2 < 0.0 || eps2 > 1.0) issues.add("optics.path_transmission", "must lie in [0, 1]");

  // ---- grid ------------------------------------------------------------
  int grid_n = 512;
  double half_extent = 20e-6;
  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    check_known_keys(g, "grid", {"n", "half_extent"}, issues);
    if (g.contains("n")) {
      if (g.at("n").is_number_integer())
        grid_n = g.at("n").get<int>();
      else
        issues.add("grid.n", "expected an integer");
    }
    half_extent = get_quantity(g, "grid", "half_extent", Dimension::Length, half_extent, issues);
  }
  if (grid_n < 2 || (grid_n & (grid_n - 1)) != 0) issues.add("grid.n", "must be a power of two >= 2");
  if (!(half_extent > 0.0)) issues.add("grid.half_extent", "must be positive");

  // ---- chain -----------------------------------------------------------
  int chain_count = 3;
  double spacing = 4e-6, psf_width = 0.0;
  std::vector<double> drive_phases;
  std::vector<Vec2> explicit_positions;
  if (root.contains("chain")) {
    const auto& c = root.at("chain");
    check_known_keys(c, "chain", {"count", "spacing", "psf_width", "drive_phases", "positions"},
                     issues);
    if (c.contains("count")) {
      if (c.at("count").is_number_integer())
        chain_count = c.at("count").get<int>();
      else
        issues.add("chain.count", "expected an integer");
    }
    spacing = get_quantity(c, "chain", "spacing", Dimension::Length, spacing, issues);
    psf_width = get_quantity(c, "chain", "psf_width", Dimension::Length, psf_width, issues);
    if (c.contains("drive_phases")) {
      if (c.at("drive_phases").is_array()) {
        for (const auto& v : c.at("drive_phases")) drive_phases.push_back(v.get<double>());
      } else {
        issues.add("chain.drive_phases", "expected an array of radians");
      }
    }
    if (c.contains("positions")) {
      if (c.at("positions").is_array()) {
        try {
          for (const auto& v : c.at("positions")) {
            if (v.is_array() && v.size() == 2) {
              double px = v.at(0).is_string()
                              ? parse_quantity(v.at(0).get<std::string>(), Dimension::Length)
                              : v.at(0).get<double>();
              double py = v.at(1).is_string()
                              ? parse_quantity(v.at(1).get<std::string>(), Dimension::Length)
                              : v.at(1).get<double>();
              explicit_positions.push_back({px, py});
            } else {
              issues.add("chain.positions", "each entry must be [x, y]");
            }
          }
        } catch (const std::exception& e) {
          issues.add("chain.positions", e.what());
        }
      } else {
        issues.add("chain.positions", "expected an array of [x, y]");
      }
    }
  }
  if (chain_count < 1) issues.add("chain.count", "must be >= 1");

  // ---- slm --------------------------------------------------------------
  SlmConfig slm;
  if (root.contains("slm")) {
    const auto& m = root.at("slm");
    check_known_keys(m, "slm",
                     {"px", "py", "pitch", "levels", "crosstalk_sigma_px", "detector_point"},
                     issues);
    if (m.contains("px")) slm.px = m.at("px").get<int>();
    if (m.contains("py")) slm.py = m.at("py").get<int>();
    slm.pitch = get_quantity(m, "slm", "pitch", Dimension::Length, slm.pitch, issues);
    if (m.contains("levels")) {
      const auto& lv = m.at("levels");
      if (lv.is_string() && lv.get<std::string>() == "continuous")
        slm.levels = 0;
      else if (lv.is_number_integer() && lv.get<int>() >= 2)
        slm.levels = lv.get<int>();
      else
        issues.add("slm.levels", "must be \"continuous\" or an integer >= 2");
    }
    slm.crosstalk_sigma_px = get_quantity(m, "slm", "crosstalk_sigma_px",
                                          Dimension::Dimensionless, slm.crosstalk_sigma_px, issues);
    if (m.contains("detector_point")) {
      const auto& dp = m.at("detector_point");
      if (dp.is_array() && dp.size() == 2) {
        try {
          slm.detector_point.x = dp.at(0).is_string()
                                     ? parse_quantity(dp.at(0).get<std::string>(), Dimension::Length)
                                     : dp.at(0).get<double>();
          slm.detector_point.y = dp.at(1).is_string()
                                     ? parse_quantity(dp.at(1).get<std::string>(), Dimension::Length)
                                     : dp.at(1).get<double>();
        } catch (const std::exception& e) {
          issues.add("slm.detector_point", e.what());
        }
      } else {
        issues.add("slm.detector_point", "expected [x, y]");
      }
    }
  }
  if (slm.px < 2 || slm.py < 2) issues.add("slm.px/py", "need at least 2x2 pixels");
  if (!(slm.pitch > 0.0)) issues.add("slm.pitch", "must be positive");
  if (slm.crosstalk_sigma_px < 0.0) issues.add("slm.crosstalk_sigma_px", "must be >= 0");

  // ---- drive -------------------------------------------------------------
  double gamma = 1.0, rabi = 0.5, detuning = 0.0, laser_freq = 0.0;
  if (root.contains("drive")) {
    const auto& d = root.at("drive");
    check_known_keys(d, "drive", {"rabi", "detuning", "half_linewidth", "laser_frequency"},
                     issues);
    gamma = get_quantity(d, "drive", "half_linewidth", Dimension::AngularFrequency, gamma, issues);
    rabi = get_drive_quantity(d, "drive", "rabi", gamma, 0.5 * gamma, issues);
    detuning = get_drive_quantity(d, "drive", "detuning", gamma, 0.0, issues);
    laser_freq =
        get_quantity(d, "drive", "laser_frequency", Dimension::AngularFrequency, 0.0, issues);
  }
  if (!(gamma > 0.0)) issues.add("drive.half_linewidth", "must be positive");
  if (rabi < 0.0) issues.add("drive.rabi", "must be >= 0");

  // ---- thermal ------------------------------------------------------------
  double trap_omega = kTwoPi * 1e6, mass = 138.0 * kAtomicMassUnit, temperature = 0.0;
  if (root.contains("thermal")) {
    const auto& t = root.at("thermal");
    check_known_keys(t, "thermal", {"trap_frequency", "mass", "temperature"}, issues);
    trap_omega =
        get_quantity(t, "thermal", "trap_frequency", Dimension::AngularFrequency, trap_omega, issues);
    mass = get_quantity(t, "thermal", "mass", Dimension::Mass, mass, issues);
    temperature =
        get_quantity(t, "thermal", "temperature", Dimension::Temperature, temperature, issues);
  }
  if (!(trap_omega > 0.0)) issues.add("thermal.trap_frequency", "must be positive");
  if (!(mass > 0.0)) issues.add("thermal.mass", "must be positive");
  if (temperature < 0.0) issues.add("thermal.temperature", "must be >= 0");

  // ---- protocol ------------------------------------------------------------
  ProtocolConfig protocol;
  protocol.budget = ProtocolBudget{0.07, 3000.0};
  if (root.contains("protocol")) {
    const auto& p = root.at("protocol");
    check_known_keys(p, "protocol", {"ions", "p", "rho", "duty_cycle"}, issues);
    if (p.contains("ions")) {
      if (p.at("ions").is_number_integer())
        protocol.n_ions = p.at("ions").get<int>();
      else
        issues.add("protocol.ions", "expected an integer");
    }
    protocol.p = get_quantity(p, "protocol", "p", Dimension::Dimensionless, protocol.p, issues);
    protocol.budget.rho =
        get_quantity(p, "protocol", "rho", Dimension::Dimensionless, protocol.budget.rho, issues);
    protocol.budget.duty_cycle_hz =
        get_quantity(p, "protocol", "duty_cycle", Dimension::Frequency,
                     protocol.budget.duty_cycle_hz, issues);
  }
  if (protocol.n_ions < 1) issues.add("protocol.ions", "must be >= 1");
  if (!(protocol.p >= 0.0 && protocol.p <= 1.0)) issues.add("protocol.p", "must lie in [0, 1]");
  if (protocol.budget.rho < 0.0 || protocol.budget.rho > 1.0)
    issues.add("protocol.rho", "must lie in [0, 1]");
  if (protocol.budget.duty_cycle_hz < 0.0) issues.add("protocol.duty_cycle", "must be >= 0");

  // ---- scan -----------------------------------------------------------------
  if (root.contains("scan")) {
    const auto& sc = root.at("scan");
    check_known_keys(sc, "scan", {"pipeline", "variable", "from", "to", "points", "spacing"},
                     issues);
    ScanSpec spec;
    spec.pipeline = sc.value("pipeline", "");
    spec.variable = sc.value("variable", "");
    spec.from = get_quantity(sc, "scan", "from", Dimension::Dimensionless, 0.0, issues);
    spec.to = get_quantity(sc, "scan", "to", Dimension::Dimensionless, 0.0, issues);
    if (sc.contains("points")) {
      if (sc.at("points").is_number_integer())
        spec.points = sc.at("points").get<int>();
      else
        issues.add("scan.points", "expected an integer");
    }
    const std::string spacing_kind = sc.value("spacing", "linear");
    if (spacing_kind == "log")
      spec.log_spacing = true;
    else if (spacing_kind == "linear")
      spec.log_spacing = false;
    else
      issues.add("scan.spacing", "must be \"linear\" or \"log\"");

    static const std::vector<std::pair<std::string, std::string>> allowed_scans = {
        {"field", "psi"},          {"mask", "levels"},          {"entangle", "p"},
        {"coeffs", "rabi_over_gamma"}, {"coeffs", "tau_gamma"}, {"motion", "temperature_mK"}};
    bool ok = false;
    for (const auto& [pipe, var] : allowed_scans)
      if (spec.pipeline == pipe && spec.variable == var) ok = true;
    if (!ok)
      issues.add("scan", "unsupported pipeline/variable pair '" + spec.pipeline + "/" +
                             spec.variable +
                             "' (allowed: field/psi, mask/levels, entangle/p, "
                             "coeffs/rabi_over_gamma, coeffs/tau_gamma, motion/temperature_mK)");
    if (spec.points < 0) issues.add("scan.points", "must be >= 0");
    if (spec.log_spacing && (spec.from <= 0.0 || spec.to <= 0.0))
      issues.add("scan", "log spacing requires positive endpoints");
    s.scan = spec;
  }

  if (root.contains("seed")) {
    if (root.at("seed").is_number_unsigned() || root.at("seed").is_number_integer())
      s.seed = root.at("seed").get<uint64_t>();
    else
      issues.add("seed", "expected an unsigned integer");
  }

  issues.raise_if_any();

  // ---- assemble validated objects -----------------------------------------
  s.train = OpticalTrain(wavelength, na, f1, f2, f3, eps1, eps2, psi);
  s.grid = make_square_grid(grid_n, half_extent);
  if (psf_width <= 0.0) psf_width = s.train.psf_width();
  if (!explicit_positions.empty()) {
    s.chain.positions = explicit_positions;
    s.chain.psf_width = psf_width;
    s.chain.drive_phases = drive_phases;
    if (s.chain.drive_phases.empty()) s.chain.drive_phases.assign(explicit_positions.size(), 0.0);
  } else {
    s.chain = make_linear_chain(chain_count, spacing, psf_width);
    if (!drive_phases.empty()) {
      if (drive_phases.size() != s.chain.positions.size())
        throw ConfigError({"chain.drive_phases: need one phase per ion"});
      s.chain.drive_phases = drive_phases;
    }
  }
  try {
    s.chain.validate();
  } catch (const std::exception& e) {
    throw ConfigError({std::string("chain: ") + e.what()});
  }
  s.slm = slm;
  s.drive = DriveParams{rabi, detuning, gamma, laser_freq};
  s.thermal = ThermalState{trap_omega, mass, temperature};
  s.protocol = protocol;
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({"cannot open scenario file: " + path});
  std::stringstream buf;
  buf << is.rdbuf();
  std::string stem = std::filesystem::path(path).stem().string();
  return parse_scenario(buf.str(), stem);
}

namespace {

std::vector<double> scan_values(const ScanSpec& sc) {
  std::vector<double> xs;
  xs.reserve(sc.points);
  if (sc.points == 1) {
    xs.push_back(sc.from);
    return xs;
  }
  for (int i = 0; i < sc.points; ++i) {
    const double t = static_cast<double>(i) / (sc.points - 1);
    xs.push_back(sc.log_spacing ? sc.from * std::pow(sc.to / sc.from, t)
                                : sc.from + (sc.to - sc.from) * t);
  }
  return xs;
}

std::vector<std::string> pipeline_columns(const ScanSpec& sc) {
  if (sc.pipeline == "entangle") return {"p", "fidelity", "p_succ", "rate"};
  if (sc.pipeline == "coeffs" && sc.variable == "rabi_over_gamma")
    return {"omega_over_gamma", "c1", "excited_population", "coherence_abs"};
  if (sc.pipeline == "coeffs" && sc.variable == "tau_gamma")
    return {"tau_gamma", "c2_re", "c2_im", "c2_abs"};
  if (sc.pipeline == "motion")
    return {"T_mK", "c3_percent", "c3_onaxis_percent", "c3_mc_percent", "nbar", "sigma_nm"};
  if (sc.pipeline == "field") return {"psi_rad", "power_ratio"};
  if (sc.pipeline == "mask") return {"levels", "eps1_effective"};
  throw std::logic_error("unknown pipeline");
}

/// Immutable pieces shared by every scan point (safe to read concurrently).
struct ScanContext {
  const Scenario& s;
  std::optional<ComplexField2D> source;   // field pipeline
  std::optional<SLMPhaseMask> supp_mask;  // field pipeline
  double free_power = 0.0;
  std::optional<SLMPhaseMask> reference_blaze;  // mask pipeline
};

ScanContext make_context(const Scenario& s) {
  ScanContext ctx{s};
  if (!s.scan) return ctx;
  if (s.scan->pipeline == "field") {
    ctx.source = ion_source_field(s.chain, s.grid);
    ctx.supp_mask = suppression_mask(*ctx.source, s.train);
    ctx.free_power = ctx.source->total_power();
  } else if (s.scan->pipeline == "mask") {
    // Representative steering grating with an 8-pixel period on the
    // scenario's modulator geometry.
    MaskGeometry geom = hardware_mask_geometry(s.train, s.slm.px, s.slm.py, s.slm.pitch);
    const double shift = kTwoPi / (8.0 * geom.map.dkx);
    IonChain one;
    one.positions = {{shift, 0.0}};
    one.drive_phases = {0.0};
    one.psf_width = s.chain.psf_width;
    ctx.reference_blaze =
        blazed_sector_mask(one, Vec2{0.0, 0.0}, sector_partition(1), {0.0}, geom);
  }
  return ctx;
}

std::vector<double> eval_point(const ScanContext& ctx, double x, uint64_t seed) {
  const Scenario& s = ctx.s;
  const ScanSpec& sc = *s.scan;
  if (sc.pipeline == "entangle") {
    const double F = herald_fidelity(s.protocol.n_ions, x);
    const double P = success_probability(s.protocol.n_ions, x, s.protocol.budget);
    const double R = rate_estimate(s.protocol.n_ions, x, s.protocol.budget);
    return {x, F, P, R};
  }
  if (sc.pipeline == "coeffs" && sc.variable == "rabi_over_gamma") {
    DriveParams d = s.drive;
    d.rabi = x * d.half_linewidth;
    const auto ss = steady_state(d);
    return {x, c1(d), ss.excited_population(), ss.coherence_abs()};
  }
  if (sc.pipeline == "coeffs" && sc.variable == "tau_gamma") {
    const double tau = x / s.drive.half_linewidth;
    const auto v = c2(tau, s.drive);
    return {x, v.real(), v.imag(), std::abs(v)};
  }
  if (sc.pipeline == "motion") {
    ThermalState t = s.thermal;
    t.temperature = x * 1e-3;
    const double nbar = t.nbar();
    const double sigma = t.sigma();
    const double spot = s.chain.psf_width;
    const auto closed = c3(sigma, spot, s.train.wavelength());
    const auto onaxis = c3_on_axis(sigma, spot, s.train.wavelength());
    const double mc = c3_displacement_mc(sigma, spot, s.train.wavelength(), 10000, seed);
    return {x, 100.0 * closed.value, 100.0 * onaxis.value, 100.0 * mc, nbar, sigma * 1e9};
  }
  if (sc.pipeline == "field") {
    OpticalTrain t = s.train.with_roundtrip_phase(x);
    ComplexField2D img = detector_image(*ctx.source, *ctx.supp_mask, t);
    return {x, img.total_power() / ctx.free_power};
  }
  if (sc.pipeline == "mask") {
    const int levels = static_cast<int>(std::lround(x));
    CrosstalkModel xt{s.slm.crosstalk_sigma_px};
    auto [mask, eps1] = quantize_and_losses(*ctx.reference_blaze, levels, xt);
    return {static_cast<double>(levels), eps1};
  }
  throw std::logic_error("unknown pipeline");
}

}  // namespace

ScanResult run_scan(const Scenario& s, int jobs) {
  if (!s.scan) throw ConfigError({"scan: scenario has no scan block"});
  const ScanSpec& sc = *s.scan;
  ScanResult result;
  result.table = ResultTable(pipeline_columns(sc));
  result.table.set_provenance(s.provenance());

  const std::vector<double> xs = scan_values(sc);
  if (xs.empty()) return result;

  const ScanContext ctx = make_context(s);
  std::vector<std::optional<std::vector<double>>> rows(xs.size());
  std::vector<ScanFailure> failures;
  std::mutex fail_mutex;
  std::atomic<size_t> cursor{0};

  auto worker = [&] {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= xs.size()) return;
      try {
        rows[i] = eval_point(ctx, xs[i], point_seed(s.seed, static_cast<int>(i)));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        failures.push_back({static_cast<int>(i), xs[i], e.what()});
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(xs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& r : rows)
    if (r) result.table.add_row(std::move(*r));
  std::sort(failures.begin(), failures.end(),
            [](const ScanFailure& a, const ScanFailure& b) { return a.index < b.index; });
  result.failures = std::move(failures);
  return result;
}

ResultTable entangle_summary(const Scenario& s) {
  ResultTable t({"ions", "p", "fidelity", "p_succ", "rate", "rho"});
  t.set_provenance(s.provenance());
  const double F = herald_fidelity(s.protocol.n_ions, s.protocol.p);
  const double P = success_probability(s.protocol.n_ions, s.protocol.p, s.protocol.budget);
  const double R = rate_estimate(s.protocol.n_ions, s.protocol.p, s.protocol.budget);
  t.add_row({static_cast<double>(s.protocol.n_ions), s.protocol.p, F, P, R, s.protocol.budget.rho});
  return t;
}

ResultTable coeffs_summary(const Scenario& s, double tau) {
  ResultTable t({"omega_over_gamma", "delta_over_gamma", "tau_gamma", "c1", "c2_re", "c2_im",
                 "c2_abs", "excited_population", "coherence_abs"});
  t.set_provenance(s.provenance());
  const auto ss = steady_state(s.drive);
  const auto v = c2(tau, s.drive);
  t.add_row({s.drive.rabi / s.drive.half_linewidth, s.drive.detuning / s.drive.half_linewidth,
             tau * s.drive.half_linewidth, c1(s.drive), v.real(), v.imag(), std::abs(v),
             ss.excited_population(), ss.coherence_abs()});
  return t;
}

ResultTable motion_summary(const Scenario& s) {
  ResultTable t({"T_mK", "nbar", "sigma_nm", "c3_percent", "c3_onaxis_percent", "expansion_valid"});
  t.set_provenance(s.provenance());
  const double nbar = s.thermal.nbar();
  const double sigma = s.thermal.sigma();
  const auto closed = c3(sigma, s.chain.psf_width, s.train.wavelength());
  const auto onaxis = c3_on_axis(sigma, s.chain.psf_width, s.train.wavelength());
  t.add_row({s.thermal.temperature * 1e3, nbar, sigma * 1e9, 100.0 * closed.value,
             100.0 * onaxis.value, closed.valid_expansion ? 1.0 : 0.0});
  return t;
}

namespace {

std::string entangle_scn(int n) {
  std::ostringstream os;
  os << "{\n"
     << "  \"name\": \"cabrillo_n" << n << "\",\n"
     << "  \"protocol\": {\"ions\": " << n << ", \"rho\": 1.0, \"duty_cycle\": \"3 kHz\"},\n"
     << "  \"scan\": {\"pipeline\": \"entangle\", \"variable\": \"p\",\n"
     << "           \"from\": 1e-4, \"to\": 0.1, \"points\": 200, \"spacing\": \"log\"}\n"
     << "}\n";
  return os.str();
}

std::string coeffs_scn(int delta_over_gamma) {
  std::ostringstream os;
  os << "{\n"
     << "  \"name\": \"driven_delta" << delta_over_gamma << "\",\n"
     << "  \"drive\": {\"half_linewidth\": 1.0, \"detuning\": \"" << delta_over_gamma
     << " gamma\"},\n"
     << "  \"scan\": {\"pipeline\": \"coeffs\", \"variable\": \"rabi_over_gamma\",\n"
     << "           \"from\": 0.0, \"to\": 10.0, \"points\": 201}\n"
     << "}\n";
  return os.str();
}

std::string c2_scn(const char* tag, const char* omega) {
  std::ostringstream os;
  os << "{\n"
     << "  \"name\": \"temporal_omega" << tag << "\",\n"
     << "  \"drive\": {\"half_linewidth\": 1.0, \"rabi\": \"" << omega
     << " gamma\", \"detuning\": 0.0},\n"
     << "  \"scan\": {\"pipeline\": \"coeffs\", \"variable\": \"tau_gamma\",\n"
     << "           \"from\": 0.01, \"to\": 0.9, \"points\": 100, \"spacing\": \"log\"}\n"
     << "}\n";
  return os.str();
}

const char* kMotionScn =
    "{\n"
    "  \"name\": \"motion_vs_T\",\n"
    "  \"thermal\": {\"trap_frequency\": \"1 MHz\", \"mass\": \"138 amu\"},\n"
    "  \"scan\": {\"pipeline\": \"motion\", \"variable\": \"temperature_mK\",\n"
    "           \"from\": 0.0, \"to\": 0.6, \"points\": 121}\n"
    "}\n";

const char* kSuppressionScn =
    "{\n"
    "  \"name\": \"suppression_vs_psi\",\n"
    "  \"optics\": {\"slm_reflectivity\": 1.0, \"path_transmission\": 1.0},\n"
    "  \"grid\": {\"n\": 256, \"half_extent\": \"20 um\"},\n"
    "  \"chain\": {\"count\": 3, \"spacing\": \"4 um\"},\n"
    "  \"scan\": {\"pipeline\": \"field\", \"variable\": \"psi\",\n"
    "           \"from\": 0.0, \"to\": 6.283185307179586, \"points\": 65}\n"
    "}\n";

const char* kLevelsScn =
    "{\n"
    "  \"name\": \"efficiency_vs_levels\",\n"
    "  \"scan\": {\"pipeline\": \"mask\", \"variable\": \"levels\",\n"
    "           \"from\": 2, \"to\": 16, \"points\": 15}\n"
    "}\n";

}  // namespace

const std::vector<BundledScenario>& bundled_scenarios() {
  static const std::vector<BundledScenario> bundle = [] {
    std::vector<BundledScenario> v;
    for (int n = 2; n <= 5; ++n) {
      BundledScenario b;
      b.name = "cabrillo_n" + std::to_string(n);
      b.json = entangle_scn(n);
      b.outputs = {{"fidelity_" + std::to_string(n) + ".dat", {"p", "fidelity"}},
                   {"p_succ" + std::to_string(n) + ".dat", {"p", "p_succ"}}};
      v.push_back(std::move(b));
    }
    for (int delta : {0, 1, 5}) {
      BundledScenario b;
      b.name = "driven_delta" + std::to_string(delta);
      b.json = coeffs_scn(delta);
      const std::string suffix = "_delta" + std::to_string(delta) + ".dat";
      b.outputs = {{"c1" + suffix, {"omega_over_gamma", "c1"}},
                   {"population" + suffix, {"omega_over_gamma", "excited_population"}},
                   {"coherence" + suffix, {"omega_over_gamma", "coherence_abs"}}};
      v.push_back(std::move(b));
    }
    {
      const char* tags[3] = {"0.5", "0.8", "1.0"};
      for (const char* tag : tags) {
        BundledScenario b;
        b.name = std::string("temporal_omega") + tag;
        b.json = c2_scn(tag, tag);
        b.outputs = {{"c2_omega" + std::string(tag) + ".dat",
                      {"tau_gamma", "c2_re", "c2_im", "c2_abs"}}};
        v.push_back(std::move(b));
      }
    }
    {
      BundledScenario b;
      b.name = "motion_vs_T";
      b.json = kMotionScn;
      b.outputs = {{"c3_vs_T.dat", {"T_mK", "c3_percent"}},
                   {"c3_variants.dat",
                    {"T_mK", "c3_percent", "c3_onaxis_percent", "c3_mc_percent", "nbar"}}};
      v.push_back(std::move(b));
    }
    {
      BundledScenario b;
      b.name = "suppression_vs_psi";
      b.json = kSuppressionScn;
      b.outputs = {{"suppression_vs_psi.dat", {"psi_rad", "power_ratio"}}};
      v.push_back(std::move(b));
    }
    {
      BundledScenario b;
      b.name = "efficiency_vs_levels";
      b.json = kLevelsScn;
      b.outputs = {{"eps1_vs_levels.dat", {"levels", "eps1_effective"}}};
      v.push_back(std::move(b));
    }
    return v;
  }();
  return bundle;
}

ReproReport run_repro(const std::string& out_dir, uint64_t seed_override, TableFormat format,
                      int jobs) {
  namespace fs = std::filesystem;
  ReproReport report;
  fs::create_directories(fs::path(out_dir) / "scenarios");
  fs::create_directories(fs::path(out_dir) / "data");

  for (const auto& bundle : bundled_scenarios()) {
    const fs::path scn_path = fs::path(out_dir) / "scenarios" / (bundle.name + ".scn");
    {
      std::ofstream os(scn_path);
      os << bundle.json;
    }
    report.files.push_back(scn_path.string());
    try {
      Scenario s = parse_scenario(bundle.json, bundle.name);
      if (seed_override != 0) s.seed = seed_override;
      ScanResult res = run_scan(s, jobs);
      for (const auto& fail : res.failures)
        report.failures.push_back(bundle.name + "[" + std::to_string(fail.index) +
                                  "]: " + fail.message);
      for (const auto& out : bundle.outputs) {
        ResultTable t = res.table.select(out.columns);
        fs::path path = fs::path(out_dir) / "data" / out.filename;
        if (format == TableFormat::Csv) path.replace_extension(".csv");
        write_table(t, path.string(), format);
        report.files.push_back(path.string());
      }
    } catch (const std::exception& e) {
      report.failures.push_back(bundle.name + ": " + e.what());
    }
  }
  return report;
}

}  // namespace slmsim
