#include "slmsim/optics.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace slmsim {

namespace {

// FFTW plan creation is not thread safe; execution on distinct buffers is.
std::mutex g_fftw_mutex;

// Centred DFT through the checkerboard identity
//   sum_j f_j e^{-2 pi i (m - n/2)(j - n/2)/n}
//     = e^{-i pi n/2} (-1)^m FFT[(-1)^j f_j]_m
// applied per axis, so the k = 0 and r = 0 samples sit at index n/2.
void centered_transform(const ComplexField2D& in, ComplexField2D& out, int sign, double scale) {
  const int nx = in.nx(), ny = in.ny();
  std::vector<std::complex<double>> buf(in.samples());
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      if ((ix + iy) & 1) buf[static_cast<size_t>(iy) * nx + ix] *= -1.0;

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    plan = fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    fftw_destroy_plan(plan);
  }

  // Global phase e^{sign * i pi (nx + ny)/2}: unity when nx + ny is a
  // multiple of 4 (all power-of-two grids >= 4), -1 only for n = 2 axes.
  const std::complex<double> global = std::polar(1.0, sign * kPi * 0.5 * (nx + ny));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      std::complex<double> v = buf[static_cast<size_t>(iy) * nx + ix];
      if ((ix + iy) & 1) v *= -1.0;
      out.at(ix, iy) = v * global * scale;
    }
}

double fourier_pitch(int n, double d) { return kTwoPi / (n * d); }

void apply_mask_inplace(ComplexField2D& ff, const SLMPhaseMask& mask) {
  const int nx = ff.nx(), ny = ff.ny();
  if (mask.matches_fourier_grid(nx, ny, ff.dx(), ff.dy())) {
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) ff.at(ix, iy) *= mask.value(ix, iy);
    return;
  }
  // Grid mismatch: nearest-pixel resampling; value_at throws GeometryError
  // when the mask does not cover the requested wavevector.
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) ff.at(ix, iy) *= mask.value_at(ff.x(ix), ff.y(iy));
}

}  // namespace

ComplexField2D ion_source_field(const IonChain& chain, const GridSpec& grid) {
  chain.validate();
  const double s = chain.psf_width;
  if (s < 2.0 * std::max(grid.dx, grid.dy))
    throw UndersamplingError("ion image scale s is below two grid pitches");
  const double margin = 6.0 * s;
  const double x_lo = grid.x(0), x_hi = grid.x(grid.nx - 1);
  const double y_lo = grid.y(0), y_hi = grid.y(grid.ny - 1);
  for (const auto& r : chain.positions) {
    if (r.x - margin < x_lo || r.x + margin > x_hi || r.y - margin < y_lo ||
        r.y + margin > y_hi)
      throw ExtentError("grid does not cover the ion chain with a 6 s margin");
  }

  ComplexField2D f = ComplexField2D::zeros(grid, PlaneKind::IonPlane);
  // kappa = 1/sqrt(2 pi s^2): integral of kappa^2 e^{-r^2/2s^2} is 1.
  const double kappa = 1.0 / (s * std::sqrt(kTwoPi));
  const double inv4s2 = 1.0 / (4.0 * s * s);
  for (int n = 0; n < chain.count(); ++n) {
    const Vec2 rn = chain.positions[n];
    const std::complex<double> amp = std::polar(kappa, chain.drive_phases[n]);
    for (int iy = 0; iy < grid.ny; ++iy) {
      const double yy = grid.y(iy) - rn.y;
      for (int ix = 0; ix < grid.nx; ++ix) {
        const double xx = grid.x(ix) - rn.x;
        f.at(ix, iy) += amp * std::exp(-(xx * xx + yy * yy) * inv4s2);
      }
    }
  }
  return f;
}

ComplexField2D forward_farfield(const ComplexField2D& f) {
  if (f.plane() == PlaneKind::FourierPlane)
    throw GeometryError("forward_farfield expects an image-plane field");
  const double dkx = fourier_pitch(f.nx(), f.dx());
  const double dky = fourier_pitch(f.ny(), f.dy());
  ComplexField2D out(f.nx(), f.ny(), dkx, dky, PlaneKind::FourierPlane);
  centered_transform(f, out, -1, f.dx() * f.dy() / kTwoPi);
  return out;
}

ComplexField2D inverse_farfield(const ComplexField2D& ff, PlaneKind out_kind) {
  if (ff.plane() != PlaneKind::FourierPlane)
    throw GeometryError("inverse_farfield expects a Fourier-plane field");
  const double dx = fourier_pitch(ff.nx(), ff.dx());
  const double dy = fourier_pitch(ff.ny(), ff.dy());
  ComplexField2D out(ff.nx(), ff.ny(), dx, dy, out_kind);
  centered_transform(ff, out, +1, ff.dx() * ff.dy() / kTwoPi);
  return out;
}

ComplexField2D reflect_via_slm(const ComplexField2D& f, const SLMPhaseMask& mask,
                               const OpticalTrain& train) {
  ComplexField2D ff = forward_farfield(f);
  apply_mask_inplace(ff, mask);
  const std::complex<double> pref = std::polar(train.rho(), train.roundtrip_phase());
  for (auto& v : ff.samples()) v *= pref;
  ComplexField2D w = inverse_farfield(ff, PlaneKind::IonPlane);
  return invert_coordinates(w, PlaneKind::IonPlane);
}

ComplexField2D composite_ion_plane_field(const ComplexField2D& f, const SLMPhaseMask& mask,
                                         const OpticalTrain& train) {
  ComplexField2D fm = reflect_via_slm(f, mask, train);
  ComplexField2D u = f;
  for (size_t i = 0; i < u.samples().size(); ++i) u.samples()[i] += fm.samples()[i];
  return u;
}

ComplexField2D detector_farfield(const ComplexField2D& f, const SLMPhaseMask& mask,
                                 const OpticalTrain& train) {
  ComplexField2D ff = forward_farfield(f);
  ComplexField2D masked = ff;
  apply_mask_inplace(masked, mask);
  // u~(k) = F(k) + rho e^{i psi} m(-k) F(-k): the second term is the masked
  // spectrum evaluated at the inverted wavevector.
  ComplexField2D flipped = invert_coordinates(masked, PlaneKind::FourierPlane);
  const std::complex<double> pref = std::polar(train.rho(), train.roundtrip_phase());
  ComplexField2D out = ff;
  for (size_t i = 0; i < out.samples().size(); ++i)
    out.samples()[i] += pref * flipped.samples()[i];
  return out;
}

ComplexField2D detector_image(const ComplexField2D& f, const SLMPhaseMask& mask,
                              const OpticalTrain& train) {
  ComplexField2D u = composite_ion_plane_field(f, mask, train);
  return invert_coordinates(u, PlaneKind::DetectorPlane);
}

}  // namespace slmsim
