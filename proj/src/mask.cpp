#include "slmsim/mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "slmsim/optics.hpp"

namespace slmsim {

MaskGeometry mask_geometry_for(const GridSpec& g, const OpticalTrain& train) {
  MaskGeometry geom;
  geom.px = g.nx;
  geom.py = g.ny;
  const double dkx = kTwoPi / (g.nx * g.dx);
  const double dky = kTwoPi / (g.ny * g.dy);
  geom.map = KMapping{-(g.nx / 2) * dkx, dkx, -(g.ny / 2) * dky, dky};
  // Physical pixel pitch implied by the f1 mapping k = 2 pi x / (lambda f1).
  geom.pitch = dkx * train.wavelength() * train.f1() / kTwoPi;
  return geom;
}

MaskGeometry hardware_mask_geometry(const OpticalTrain& train, int px, int py, double pitch) {
  if (px < 2 || py < 2) throw std::invalid_argument("mask needs at least 2x2 pixels");
  if (!(pitch > 0.0)) throw std::invalid_argument("pixel pitch must be positive");
  MaskGeometry geom;
  geom.px = px;
  geom.py = py;
  geom.pitch = pitch;
  const double dk = kTwoPi * pitch / (train.wavelength() * train.f1());
  geom.map = KMapping{-(px / 2) * dk, dk, -(py / 2) * dk, dk};
  return geom;
}

SLMPhaseMask::SLMPhaseMask(const MaskGeometry& geom, int quant_levels)
    : geom_(geom), quant_levels_(quant_levels) {
  if (geom_.px < 2 || geom_.py < 2) throw std::invalid_argument("mask needs at least 2x2 pixels");
  if (!(geom_.pitch > 0.0)) throw std::invalid_argument("pixel pitch must be positive");
  phases_.assign(static_cast<size_t>(geom_.px) * geom_.py, 0.0);
  flags_.assign(phases_.size(), 0);
}

long SLMPhaseMask::flagged_count() const {
  long n = 0;
  for (auto f : flags_) n += f;
  return n;
}

std::complex<double> SLMPhaseMask::value(int i, int j) const {
  return std::polar(1.0, phase(i, j));
}

double SLMPhaseMask::phase_at(double kx, double ky) const {
  const auto& m = geom_.map;
  const double fi = (kx - m.kx0) / m.dkx;
  const double fj = (ky - m.ky0) / m.dky;
  const long i = std::lround(fi);
  const long j = std::lround(fj);
  if (i < 0 || i >= geom_.px || j < 0 || j >= geom_.py)
    throw GeometryError("wavevector outside the mask pixel array");
  return phase(static_cast<int>(i), static_cast<int>(j));
}

std::complex<double> SLMPhaseMask::value_at(double kx, double ky) const {
  return std::polar(1.0, phase_at(kx, ky));
}

bool SLMPhaseMask::matches_fourier_grid(int nx, int ny, double dkx, double dky) const {
  if (geom_.px != nx || geom_.py != ny) return false;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); };
  return close(geom_.map.dkx, dkx) && close(geom_.map.dky, dky) &&
         close(geom_.map.kx0, -(nx / 2) * dkx) && close(geom_.map.ky0, -(ny / 2) * dky);
}

int SectorLayout::sector_of(double kx, double ky) const {
  if (n_sectors == 1) return 0;
  const double width = kTwoPi / n_sectors;
  double rel = wrap_phase(std::atan2(ky, kx) - angular_offset);
  // Half-open slices (lo, hi]: a pixel exactly on a shared edge goes to the
  // lower sector index.
  int idx = (rel <= 0.0) ? 0 : static_cast<int>(std::ceil(rel / width)) - 1;
  return std::clamp(idx, 0, n_sectors - 1);
}

SectorLayout sector_partition(int n, double angular_offset) {
  if (n < 1) throw std::domain_error("sector count must be >= 1");
  SectorLayout layout;
  layout.n_sectors = n;
  layout.angular_offset = wrap_phase(angular_offset);
  layout.assignment.resize(n);
  for (int i = 0; i < n; ++i) layout.assignment[i] = i;
  return layout;
}

SLMPhaseMask blazed_sector_mask(const IonChain& chain, Vec2 r_d, const SectorLayout& layout,
                                const std::vector<double>& sector_phases,
                                const MaskGeometry& geom) {
  chain.validate();
  if (layout.n_sectors != chain.count())
    throw std::invalid_argument("sector count must equal the number of addressed ions");
  if (static_cast<int>(sector_phases.size()) != layout.n_sectors)
    throw std::invalid_argument("one constant phase per sector required");
  for (int idx : layout.assignment)
    if (idx < 0 || idx >= chain.count()) throw std::invalid_argument("sector assignment out of range");

  // Nyquist check: the blaze for ion j advances by |dk . (r_j - r_d)| per
  // pixel; a grating period below 2 pixels is not representable.
  for (int j = 0; j < chain.count(); ++j) {
    const Vec2 shift = chain.positions[j] - r_d;
    const double step =
        std::max(std::abs(geom.map.dkx * shift.x), std::abs(geom.map.dky * shift.y));
    if (step > kPi)
      throw ResolutionError("requested image shift needs a grating period below 2 pixels");
  }

  SLMPhaseMask mask(geom);
  for (int j = 0; j < geom.py; ++j) {
    const double ky = geom.map.ky(j);
    for (int i = 0; i < geom.px; ++i) {
      const double kx = geom.map.kx(i);
      const int ion = layout.assignment[layout.sector_of(kx, ky)];
      const Vec2 shift = chain.positions[ion] - r_d;
      mask.phase(i, j) = wrap_phase(sector_phases[layout.sector_of(kx, ky)] + kx * shift.x +
                                    ky * shift.y);
    }
  }
  return mask;
}

SLMPhaseMask suppression_mask_from_farfield(const ComplexField2D& ff, const OpticalTrain& train) {
  if (ff.plane() != PlaneKind::FourierPlane)
    throw GeometryError("suppression mask needs a Fourier-plane field");
  MaskGeometry geom;
  geom.px = ff.nx();
  geom.py = ff.ny();
  geom.map = KMapping{ff.x(0), ff.dx(), ff.y(0), ff.dy()};
  geom.pitch = ff.dx() * train.wavelength() * train.f1() / kTwoPi;

  SLMPhaseMask mask(geom);
  const double floor = 1e-9 * ff.max_abs();
  for (int j = 0; j < geom.py; ++j)
    for (int i = 0; i < geom.px; ++i) {
      const auto v = ff.at(i, j);
      if (std::abs(v) < floor) {
        mask.phase(i, j) = 0.0;
        mask.set_flag(i, j);
      } else {
        mask.phase(i, j) = wrap_phase(-2.0 * std::arg(v));
      }
    }
  return mask;
}

SLMPhaseMask suppression_mask(const ComplexField2D& ion_plane_field, const OpticalTrain& train) {
  if (ion_plane_field.plane() != PlaneKind::IonPlane)
    throw GeometryError("suppression mask needs the ion-plane source field");
  return suppression_mask_from_farfield(forward_farfield(ion_plane_field), train);
}

namespace {

// Replicate-edge Gaussian smoothing of the programmed (wrapped) phase
// pattern, separable per axis.
std::vector<double> smooth_rows(const std::vector<double>& in, int nx, int ny, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    kernel[t + radius] = std::exp(-0.5 * (t / sigma) * (t / sigma));
    sum += kernel[t + radius];
  }
  for (auto& w : kernel) w /= sum;

  std::vector<double> tmp(in.size()), out(in.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        int ii = std::clamp(i + t, 0, nx - 1);
        acc += kernel[t + radius] * in[static_cast<size_t>(j) * nx + ii];
      }
      tmp[static_cast<size_t>(j) * nx + i] = acc;
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        int jj = std::clamp(j + t, 0, ny - 1);
        acc += kernel[t + radius] * tmp[static_cast<size_t>(jj) * nx + i];
      }
      out[static_cast<size_t>(j) * nx + i] = acc;
    }
  return out;
}

}  // namespace

std::pair<SLMPhaseMask, double> quantize_and_losses(const SLMPhaseMask& mask, int levels,
                                                    const CrosstalkModel& crosstalk) {
  if (levels != 0 && levels < 2) throw std::domain_error("quantization needs >= 2 levels");

  SLMPhaseMask out(mask.geometry(), levels);
  std::vector<double> programmed = mask.phases();
  if (levels >= 2) {
    const double step = kTwoPi / levels;
    for (auto& phi : programmed) {
      long lvl = static_cast<long>(std::floor(phi / step + 0.5)) % levels;
      phi = lvl * step;
    }
  }
  if (crosstalk.sigma_px > 0.0)
    programmed = smooth_rows(programmed, mask.px(), mask.py(), crosstalk.sigma_px);

  // eps1 = |< e^{i(processed - ideal)} >|^2: power fraction left in the
  // programmed order after device imperfections.
  std::complex<double> overlap(0.0, 0.0);
  for (size_t i = 0; i < programmed.size(); ++i) {
    out.phases()[i] = wrap_phase(programmed[i]);
    overlap += std::polar(1.0, programmed[i] - mask.phases()[i]);
  }
  overlap /= static_cast<double>(programmed.size());
  return {std::move(out), std::norm(overlap)};
}

void write_mask(const SLMPhaseMask& mask, std::ostream& os) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# %d %d %.17g %d", mask.px(), mask.py(), mask.pitch(),
                mask.quant_levels());
  os << buf << "\n";
  const auto& m = mask.mapping();
  std::snprintf(buf, sizeof buf, "# kmap %.17g %.17g %.17g %.17g", m.kx0, m.dkx, m.ky0, m.dky);
  os << buf << "\n";
  for (int j = 0; j < mask.py(); ++j) {
    for (int i = 0; i < mask.px(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", mask.phase(i, j));
      if (i) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

void write_mask(const SLMPhaseMask& mask, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_mask(mask, os);
}

SLMPhaseMask read_mask(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.empty() || header[0] != '#')
    throw std::runtime_error("mask file: missing header");
  std::istringstream hs(header.substr(1));
  MaskGeometry geom;
  int levels = 0;
  if (!(hs >> geom.px >> geom.py >> geom.pitch >> levels))
    throw std::runtime_error("mask file: bad header");

  // Optional k-mapping line; default map derives from the pitch alone.
  geom.map = KMapping{-(geom.px / 2) * geom.pitch, geom.pitch, -(geom.py / 2) * geom.pitch,
                      geom.pitch};
  std::streampos after_header = is.tellg();
  std::string second;
  if (std::getline(is, second) && second.rfind("# kmap", 0) == 0) {
    std::istringstream ks(second.substr(6));
    if (!(ks >> geom.map.kx0 >> geom.map.dkx >> geom.map.ky0 >> geom.map.dky))
      throw std::runtime_error("mask file: bad k-mapping line");
  } else {
    is.clear();
    is.seekg(after_header);
  }

  SLMPhaseMask mask(geom, levels);
  for (int j = 0; j < geom.py; ++j)
    for (int i = 0; i < geom.px; ++i) {
      double phi;
      if (!(is >> phi)) throw std::runtime_error("mask file: truncated phase data");
      mask.phase(i, j) = phi;
    }
  return mask;
}

SLMPhaseMask read_mask(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_mask(is);
}

}  // namespace slmsim
