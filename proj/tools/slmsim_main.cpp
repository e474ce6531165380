#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "slmsim/optics.hpp"
#include "slmsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace slmsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = ".";
  uint64_t seed = 0;  // 0 = keep scenario seed
  std::string format = "dat";
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool scenario_required = true) {
  auto* opt = cmd->add_option("--scenario", o.scenario_path, "scenario file (.scn, JSON)");
  if (scenario_required) opt->required();
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "override the scenario seed (0 keeps it)");
  cmd->add_option("--format", o.format, "table format: dat|csv")
      ->check(CLI::IsMember({"dat", "csv"}))
      ->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "worker threads for scans")->capture_default_str();
}

TableFormat to_format(const std::string& f) {
  return f == "csv" ? TableFormat::Csv : TableFormat::Dat;
}

std::string table_ext(const std::string& f) { return f == "csv" ? ".csv" : ".dat"; }

Scenario load(const CommonOpts& o) {
  Scenario s = load_scenario(o.scenario_path);
  if (o.seed != 0) s.seed = o.seed;
  return s;
}

void ensure_out(const CommonOpts& o) { fs::create_directories(o.out_dir); }

int write_and_report(const ResultTable& t, const CommonOpts& o, const std::string& stem) {
  ensure_out(o);
  const fs::path path = fs::path(o.out_dir) / (stem + table_ext(o.format));
  write_table(t, path.string(), to_format(o.format));
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

int run_field(const CommonOpts& o) {
  Scenario s = load(o);
  ensure_out(o);
  ComplexField2D f = ion_source_field(s.chain, s.grid);
  SLMPhaseMask mask = suppression_mask(f, s.train);
  ComplexField2D u = composite_ion_plane_field(f, mask, s.train);
  ComplexField2D d = detector_image(f, mask, s.train);
  write_field(f, (fs::path(o.out_dir) / "source_field.txt").string());
  write_field(u, (fs::path(o.out_dir) / "composite_field.txt").string());
  write_field(d, (fs::path(o.out_dir) / "detector_field.txt").string());
  std::cout << "free-space power  " << format_double(f.total_power()) << "\n"
            << "composite power   " << format_double(u.total_power()) << "\n"
            << "suppression ratio " << format_double(u.total_power() / f.total_power())
            << "  (psi = " << format_double(s.train.roundtrip_phase()) << " rad)\n"
            << "wrote source/composite/detector fields under " << o.out_dir << "\n";
  return kExitOk;
}

int run_mask(const CommonOpts& o, const std::string& kind) {
  Scenario s = load(o);
  ensure_out(o);
  fs::path path = fs::path(o.out_dir) / (kind + "_mask.txt");
  if (kind == "suppression") {
    ComplexField2D f = ion_source_field(s.chain, s.grid);
    SLMPhaseMask mask = suppression_mask(f, s.train);
    auto [processed, eps1] =
        quantize_and_losses(mask, s.slm.levels, CrosstalkModel{s.slm.crosstalk_sigma_px});
    write_mask(processed, path.string());
    std::cout << "eps1_effective " << format_double(eps1) << "\n";
  } else {
    MaskGeometry geom = mask_geometry_for(s.grid, s.train);
    SectorLayout layout = sector_partition(s.chain.count());
    std::vector<double> phases(s.chain.count(), 0.0);
    SLMPhaseMask mask = blazed_sector_mask(s.chain, s.slm.detector_point, layout, phases, geom);
    auto [processed, eps1] =
        quantize_and_losses(mask, s.slm.levels, CrosstalkModel{s.slm.crosstalk_sigma_px});
    write_mask(processed, path.string());
    std::cout << "eps1_effective " << format_double(eps1) << "\n";
  }
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

int run_scan_cmd(const CommonOpts& o) {
  Scenario s = load(o);
  ScanResult res = run_scan(s, o.jobs);
  ensure_out(o);
  const fs::path path = fs::path(o.out_dir) / (s.name + "_scan" + table_ext(o.format));
  write_table(res.table, path.string(), to_format(o.format));
  std::cout << "wrote " << path.string() << " (" << res.table.row_count() << " points)\n";
  if (!res.failures.empty()) {
    std::cerr << res.failures.size() << " scan point(s) failed:\n";
    for (const auto& f : res.failures)
      std::cerr << "  [" << f.index << "] x=" << format_double(f.value) << ": " << f.message
                << "\n";
    return kExitPartial;
  }
  return kExitOk;
}

int run_repro_cmd(const CommonOpts& o) {
  ReproReport rep = run_repro(o.out_dir, o.seed, to_format(o.format), o.jobs);
  for (const auto& f : rep.files) std::cout << "wrote " << f << "\n";
  if (!rep.failures.empty()) {
    std::cerr << rep.failures.size() << " failure(s):\n";
    for (const auto& f : rep.failures) std::cerr << "  " << f << "\n";
    return kExitPartial;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"half-cavity SLM emission-control simulator"};
  app.require_subcommand(1);

  CommonOpts field_o, mask_o, entangle_o, coeffs_o, motion_o, scan_o, repro_o;
  std::string mask_kind = "suppression";
  double tau_gamma = 0.027;

  auto* cmd_field = app.add_subcommand("field", "propagate the scenario chain and dump fields");
  add_common(cmd_field, field_o);

  auto* cmd_mask = app.add_subcommand("mask", "synthesize a phase mask to a file");
  add_common(cmd_mask, mask_o);
  cmd_mask->add_option("--kind", mask_kind, "suppression|blazed")
      ->check(CLI::IsMember({"suppression", "blazed"}))
      ->capture_default_str();

  auto* cmd_entangle =
      app.add_subcommand("entangle", "herald fidelity / success probability / rate");
  add_common(cmd_entangle, entangle_o);

  auto* cmd_coeffs = app.add_subcommand("coeffs", "steady state plus C1 and C2(tau)");
  add_common(cmd_coeffs, coeffs_o);
  cmd_coeffs->add_option("--tau-gamma", tau_gamma, "round-trip delay in units of 1/gamma")
      ->capture_default_str();

  auto* cmd_motion = app.add_subcommand("motion", "thermal nbar, sigma and C3");
  add_common(cmd_motion, motion_o);

  auto* cmd_scan = app.add_subcommand("scan", "run the scenario's scan block");
  add_common(cmd_scan, scan_o);

  auto* cmd_repro = app.add_subcommand("repro", "run every bundled scenario");
  add_common(cmd_repro, repro_o, /*scenario_required=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_field->parsed()) return run_field(field_o);
    if (cmd_mask->parsed()) return run_mask(mask_o, mask_kind);
    if (cmd_entangle->parsed())
      return write_and_report(entangle_summary(load(entangle_o)), entangle_o, "entangle");
    if (cmd_coeffs->parsed()) {
      Scenario s = load(coeffs_o);
      return write_and_report(coeffs_summary(s, tau_gamma / s.drive.half_linewidth), coeffs_o,
                              "coeffs");
    }
    if (cmd_motion->parsed())
      return write_and_report(motion_summary(load(motion_o)), motion_o, "motion");
    if (cmd_scan->parsed()) return run_scan_cmd(scan_o);
    if (cmd_repro->parsed()) return run_repro_cmd(repro_o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
