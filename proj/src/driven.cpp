#include "slmsim/driven.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace slmsim {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};

// Basis order (g, e). sigma_z = |g><g| - |e><e|: the ground state is the
// +1 eigenstate, so the free Hamiltonian -(omega0/2) sigma_z puts the
// excited state omega0 higher.
Matrix2c sigma_z_mat() {
  Matrix2c m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
Matrix2c sigma_minus_mat() {  // |g><e|
  Matrix2c m;
  m << 0.0, 1.0, 0.0, 0.0;
  return m;
}
Matrix2c sigma_plus_mat() {  // |e><g|
  Matrix2c m;
  m << 0.0, 0.0, 1.0, 0.0;
  return m;
}

// vec(A X B) = (B^T kron A) vec(X) for column stacking.
Matrix4c left_mul(const Matrix2c& a) {
  Matrix4c out = Matrix4c::Zero();
  out.block<2, 2>(0, 0) = a;
  out.block<2, 2>(2, 2) = a;
  return out;
}
Matrix4c right_mul(const Matrix2c& b) {
  Matrix4c out = Matrix4c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = b(j, i) * Matrix2c::Identity();
  return out;
}
Matrix4c sandwich(const Matrix2c& a, const Matrix2c& b) {  // rho -> a rho b
  Matrix4c out = Matrix4c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = b(j, i) * a;
  return out;
}

double denom(const DriveParams& d) {
  return d.rabi * d.rabi + 2.0 * d.detuning * d.detuning + 2.0 * d.half_linewidth * d.half_linewidth;
}

}  // namespace

void DriveParams::validate() const {
  if (!(half_linewidth > 0.0)) throw std::domain_error("half linewidth gamma must be positive");
  if (rabi < 0.0) throw std::domain_error("Rabi frequency must be >= 0");
}

BlochSteadyState steady_state(const DriveParams& d) {
  d.validate();
  const double D = denom(d);
  BlochSteadyState s;
  s.r_plus = 2.0 * d.rabi * Complex(d.detuning, -d.half_linewidth) / D;
  s.r_z = 2.0 * (d.detuning * d.detuning + d.half_linewidth * d.half_linewidth) / D;
  return s;
}

Eigen::Vector4cd vectorize(const Matrix2c& m) {
  Eigen::Vector4cd v;
  v << m(0, 0), m(1, 0), m(0, 1), m(1, 1);
  return v;
}

Matrix2c devectorize(const Eigen::Vector4cd& v) {
  Matrix2c m;
  m << v(0), v(2), v(1), v(3);
  return m;
}

Matrix2c steady_state_matrix(const DriveParams& d) {
  const BlochSteadyState s = steady_state(d);
  Matrix2c rho = 0.5 * (Matrix2c::Identity() + s.r_plus * sigma_plus_mat() +
                        std::conj(s.r_plus) * sigma_minus_mat() + s.r_z * sigma_z_mat());
  return rho;
}

Matrix4c liouvillian(const DriveParams& d) {
  d.validate();
  const Matrix2c sz = sigma_z_mat();
  const Matrix2c sm = sigma_minus_mat();
  const Matrix2c sp = sigma_plus_mat();
  const Matrix2c sx = sp + sm;
  const Matrix2c spm = sp * sm;

  Matrix4c L = Matrix4c::Zero();
  L += -kI * (d.detuning / 2.0) * (left_mul(sz) - right_mul(sz));
  L += -kI * (d.rabi / 2.0) * (left_mul(sx) - right_mul(sx));
  L += 2.0 * d.half_linewidth *
       (sandwich(sm, sp) - 0.5 * (left_mul(spm) + right_mul(spm)));
  return L;
}

std::pair<double, double> farfield_intensity(Vec2 k, const IonChain& chain,
                                             const DriveParams& d) {
  d.validate();
  if (chain.positions.empty()) return {0.0, 0.0};
  chain.validate();
  const double D = denom(d);
  Complex structure(0.0, 0.0);
  for (int n = 0; n < chain.count(); ++n)
    structure += std::polar(1.0, dot(k, chain.positions[n]) + chain.drive_phases[n]);
  const double coh_single = d.rabi * d.rabi *
                            (d.detuning * d.detuning + d.half_linewidth * d.half_linewidth) /
                            (D * D);
  const double inc_single = 0.5 * std::pow(d.rabi * d.rabi / D, 2);
  return {coh_single * std::norm(structure), chain.count() * inc_single};
}

double c1(const DriveParams& d) {
  d.validate();
  const double D = denom(d);
  return 0.5 * std::pow(d.rabi * d.rabi / D, 2);
}

TauCorrelator tau_correlator(double tau, const DriveParams& d) {
  d.validate();
  if (tau < 0.0) throw std::domain_error("tau must be >= 0");
  const Matrix2c rho = steady_state_matrix(d);
  const Matrix2c sm = sigma_minus_mat();
  const Matrix2c sp = sigma_plus_mat();

  const Matrix4c L = liouvillian(d);
  const Eigen::Vector4cd x0 = vectorize(sm * rho);
  const Matrix4c prop = (tau * L).exp();  // Pade scaling-and-squaring
  const Matrix2c evolved = devectorize(prop * x0);

  TauCorrelator out;
  out.rotating_frame = (sp * evolved).trace();
  out.laser_phase = d.laser_frequency * tau;
  return out;
}

std::complex<double> c2(double tau, const DriveParams& d) {
  if (tau == 0.0) return {0.0, 0.0};
  const Complex g_tau = tau_correlator(tau, d).rotating_frame;
  const Complex g_0 = Complex(0.5 * (1.0 - steady_state(d).r_z), 0.0);  // <sigma+ sigma->
  return g_tau - g_0;
}

double IntensityMap::integrated() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * dx * dy;
}

double IntensityMap::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

DetectorIntensity detector_intensity_with_slm(const std::vector<ComplexField2D>& f_n,
                                              const std::vector<ComplexField2D>& g_n,
                                              const DriveParams& d, double tau, double rho,
                                              double psi) {
  d.validate();
  if (f_n.empty() || f_n.size() != g_n.size())
    throw GeometryError("need matching non-empty per-ion field lists");
  const int nx = f_n[0].nx(), ny = f_n[0].ny();
  const double dx = f_n[0].dx(), dy = f_n[0].dy();
  for (const auto* list : {&f_n, &g_n})
    for (const auto& fld : *list)
      if (fld.nx() != nx || fld.ny() != ny || fld.dx() != dx || fld.dy() != dy)
        throw GeometryError("per-ion fields must share one grid");
  if (rho < 0.0 || rho > 1.0) throw std::domain_error("rho must lie in [0, 1]");

  // The grouped three-term intensity holds at the destructive point
  // e^{i(psi + omega_L tau)} = -1; enforce it instead of silently computing
  // something else.
  const double phase = wrap_phase(psi + d.laser_frequency * tau);
  if (std::abs(phase - kPi) > 1e-6)
    throw std::domain_error("psi + omega_L tau must equal pi (destructive point)");

  const BlochSteadyState ss = steady_state(d);
  const double coher = std::norm(ss.sigma_minus_expect());
  const double sat = c1(d);
  const Complex temporal_coeff = c2(tau, d);

  auto zero_map = [&] {
    IntensityMap m;
    m.nx = nx;
    m.ny = ny;
    m.dx = dx;
    m.dy = dy;
    m.values.assign(static_cast<size_t>(nx) * ny, 0.0);
    return m;
  };
  DetectorIntensity out{zero_map(), zero_map(), zero_map(), zero_map()};

  const size_t total = static_cast<size_t>(nx) * ny;
  for (size_t idx = 0; idx < total; ++idx) {
    Complex F(0.0, 0.0), G(0.0, 0.0);
    double sum_mismatch = 0.0;
    Complex sum_fg(0.0, 0.0);
    for (size_t n = 0; n < f_n.size(); ++n) {
      const Complex fv = f_n[n].samples()[idx];
      const Complex gv = g_n[n].samples()[idx];
      F += fv;
      G += gv;
      sum_mismatch += std::norm(fv - rho * gv);
      sum_fg += std::conj(fv) * gv;
    }
    const double t1 = coher * std::norm(F - rho * G);
    const double t2 = sat * sum_mismatch;
    // e^{i(psi + omega_L tau)} = -1 multiplies the interference term, so the
    // temporal remainder enters with a minus sign relative to C2.
    const double t3 = -2.0 * rho * (temporal_coeff * sum_fg).real();
    out.mismatch.values[idx] = t1;
    out.saturation.values[idx] = t2;
    out.temporal.values[idx] = t3;
    out.total.values[idx] = t1 + t2 + t3;
  }
  return out;
}

}  // namespace slmsim
