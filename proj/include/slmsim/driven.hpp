#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "slmsim/field.hpp"
#include "slmsim/train.hpp"

namespace slmsim {

/// Continuously driven two-level ion. gamma is the half linewidth: the
/// dissipator is 2 gamma D[sigma-], so the bare excited population decays as
/// exp(-2 gamma t). laser_frequency only feeds explicit phase factors.
struct DriveParams {
  double rabi = 0.0;            // Omega, rad/s
  double detuning = 0.0;        // Delta = omega_L - omega_0, rad/s
  double half_linewidth = 1.0;  // gamma, rad/s (> 0)
  double laser_frequency = 0.0; // omega_L, rad/s

  void validate() const;
};

/// Bloch vector of the rotating-frame steady state
/// rho_inf = (I + r+ sigma+ + r- sigma- + rz sigmaz) / 2 with
/// sigmaz = |g><g| - |e><e| (ground state has rz = +1).
struct BlochSteadyState {
  std::complex<double> r_plus;
  double r_z = 1.0;

  double excited_population() const { return 0.5 * (1.0 - r_z); }
  /// <sigma-> = r+ / 2 in the rotating frame.
  std::complex<double> sigma_minus_expect() const { return 0.5 * r_plus; }
  double coherence_abs() const { return std::abs(sigma_minus_expect()); }
};

/// r+ = 2 Omega (Delta - i gamma) / (Omega^2 + 2 Delta^2 + 2 gamma^2),
/// rz = 2 (Delta^2 + gamma^2) / (Omega^2 + 2 Delta^2 + 2 gamma^2).
BlochSteadyState steady_state(const DriveParams& d);

using Matrix4c = Eigen::Matrix4cd;
using Matrix2c = Eigen::Matrix2cd;

/// Interaction-picture Lindblad generator
///   L rho = -i (Delta/2) [sigmaz, rho] - i (Omega/2) [sigmax, rho]
///           + 2 gamma D[sigma-] rho
/// as a 4x4 matrix on column-stacked density operators (basis order g, e;
/// vec index = row + 2 * col).
Matrix4c liouvillian(const DriveParams& d);

Eigen::Vector4cd vectorize(const Matrix2c& m);
Matrix2c devectorize(const Eigen::Vector4cd& v);
Matrix2c steady_state_matrix(const DriveParams& d);

/// Free-space far-field intensity split into its interference-capable and
/// flat parts:
///   I_c(k) = |<sigma->|^2 |sum_n e^{i (k.r_n + phi_n)}|^2,
///   I_i    = (N/2) (Omega^2 / (Omega^2 + 2 Delta^2 + 2 gamma^2))^2.
/// For equal drive phases the structure factor reduces to |sum e^{i k.r_n}|^2.
/// An empty chain yields (0, 0).
std::pair<double, double> farfield_intensity(Vec2 k, const IonChain& chain, const DriveParams& d);

/// Saturation coefficient C1 = Omega^4 / (2 (Omega^2 + 2 Delta^2 + 2 gamma^2)^2),
/// equal to <sigma+ sigma-> - |<sigma->|^2 in the steady state.
double c1(const DriveParams& d);

/// Rotating-frame two-time correlator by quantum regression,
///   G(tau) = tr[sigma+ exp(tau L_I)(sigma- rho_inf)].
/// The Heisenberg correlator is e^{i omega_L tau} G(tau); the phase
/// omega_L tau is reported separately so downstream intensity formulas can
/// combine it with psi explicitly.
struct TauCorrelator {
  std::complex<double> rotating_frame;
  double laser_phase = 0.0;  // omega_L * tau, rad
};
TauCorrelator tau_correlator(double tau, const DriveParams& d);

/// Temporal-coherence coefficient C2(tau) = G(tau) - G(0) (rotating frame).
/// C2(0) = 0 exactly; C2 -> |<sigma->|^2 - <sigma+ sigma-> = -C1 as tau -> inf.
std::complex<double> c2(double tau, const DriveParams& d);

/// Real-valued map on a field grid (intensity in the arbitrary field units).
struct IntensityMap {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  std::vector<double> values;

  double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * nx + ix]; }
  double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * nx + ix]; }
  double integrated() const;
  double max_value() const;
};

/// Mean detector intensity of the suppressed configuration and its three
/// physically distinct parts, evaluated at the destructive point
/// e^{i(psi + omega_L tau)} = -1:
///   mismatch    (1-rho)^2 |F|^2 |<sigma->|^2      residual amplitude mismatch
///   saturation  C1 sum_n |f_n - rho g_n|^2        incoherent scattering
///   temporal    -2 rho Re[C2 sum_n f_n^dag g_n]   finite coherence over tau
/// f_n / g_n are the per-ion direct and SLM round-trip images on a common
/// grid, carrying no rho/psi factors of their own; F = sum f_n, G = sum g_n.
struct DetectorIntensity {
  IntensityMap total;
  IntensityMap mismatch;
  IntensityMap saturation;
  IntensityMap temporal;
};

/// Throws GeometryError if the f/g grids disagree. psi and tau must sit at
/// the destructive point (psi + omega_L tau = pi mod 2 pi) within 1e-6 rad;
/// tau still sets C2(tau).
DetectorIntensity detector_intensity_with_slm(const std::vector<ComplexField2D>& f_n,
                                              const std::vector<ComplexField2D>& g_n,
                                              const DriveParams& d, double tau, double rho,
                                              double psi);

}  // namespace slmsim
