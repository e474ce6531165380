#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slmsim/driven.hpp"
#include "slmsim/entangle.hpp"
#include "slmsim/field.hpp"
#include "slmsim/mask.hpp"
#include "slmsim/table.hpp"
#include "slmsim/thermal.hpp"
#include "slmsim/train.hpp"

namespace slmsim {

/// Unit-suffixed quantity parsing for scenario files. Accepted suffixes per
/// dimension:
///   Length: m mm um µm nm        Frequency (ordinary, returns Hz): Hz..GHz
///   AngularFrequency (returns rad/s): rad/s, or Hz..GHz scaled by 2 pi
///   Temperature: K mK uK         Mass: kg amu u
///   Angle: rad deg pi            Time: s ms us ns
/// Bare numbers are taken in the dimension's base unit (rad/s, Hz, m, K, kg,
/// rad, s). Throws std::invalid_argument naming the offending text.
enum class Dimension {
  Length,
  Frequency,
  AngularFrequency,
  Temperature,
  Mass,
  Angle,
  Time,
  Dimensionless
};
double parse_quantity(const std::string& text, Dimension dim);

struct ScanSpec {
  std::string pipeline;  // field | mask | entangle | coeffs | motion
  std::string variable;
  double from = 0.0;
  double to = 0.0;
  int points = 0;
  bool log_spacing = false;
};

struct SlmConfig {
  int px = 1272;
  int py = 1024;
  double pitch = 12.5e-6;
  int levels = 0;  // 0 = continuous
  double crosstalk_sigma_px = 0.0;
  Vec2 detector_point;  // r_d for entanglement masks
};

struct ProtocolConfig {
  int n_ions = 2;
  double p = 0.05;
  ProtocolBudget budget{1.0, 0.0};
};

/// One declarative simulation setup: every module's parameters plus at most
/// one scan block.
struct Scenario {
  std::string name;
  OpticalTrain train{493e-9, 0.6, 13.25e-3, 0.1, 0.3};
  GridSpec grid = make_square_grid(512, 20e-6);
  IonChain chain;
  SlmConfig slm;
  DriveParams drive{0.5, 0.0, 1.0, 0.0};
  ThermalState thermal{kTwoPi * 1e6, 138.0 * kAtomicMassUnit, 0.0};
  ProtocolConfig protocol;
  std::optional<ScanSpec> scan;
  uint64_t seed = 20250809ULL;
  std::string source_hash;  // FNV-1a of the scenario text

  std::string provenance() const;
};

/// Parses and validates a scenario file (JSON with unit-suffixed strings).
/// Validation reports every violation at once via ConfigError.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& name);

struct ScanFailure {
  int index = 0;
  double value = 0.0;
  std::string message;
};

struct ScanResult {
  ResultTable table;
  std::vector<ScanFailure> failures;
};

/// Evaluates the scenario's scan point by point. Points are independent and
/// evaluated on `jobs` worker threads; row order always follows the scan
/// index, and per-point RNG streams are derived from (seed, index), so the
/// output is byte-identical for any job count. A failing point is recorded
/// and skipped, never fatal.
ScanResult run_scan(const Scenario& s, int jobs = 1);

/// Single-shot (non-scan) pipeline evaluations used by the CLI subcommands.
ResultTable entangle_summary(const Scenario& s);
ResultTable coeffs_summary(const Scenario& s, double tau);
ResultTable motion_summary(const Scenario& s);

/// Scenario texts bundled for the `repro` subcommand, with the tables each
/// one contributes: (output file name, columns).
struct BundledOutput {
  std::string filename;
  std::vector<std::string> columns;
};
struct BundledScenario {
  std::string name;
  std::string json;
  std::vector<BundledOutput> outputs;
};
const std::vector<BundledScenario>& bundled_scenarios();

/// Runs every bundled scenario: writes the scenario files under
/// <out_dir>/scenarios and the tables under <out_dir>/data. A seed override
/// (nonzero) replaces each scenario's own seed. Returns the written paths;
/// partial failures are reported through the failure list.
struct ReproReport {
  std::vector<std::string> files;
  std::vector<std::string> failures;
};
ReproReport run_repro(const std::string& out_dir, uint64_t seed_override, TableFormat format,
                      int jobs);

/// Deterministic per-point RNG stream seed (splitmix64 over seed and index).
uint64_t point_seed(uint64_t scenario_seed, int point_index);

}  // namespace slmsim
