#include "slmsim/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slmsim {

namespace {

bool is_pow2(int n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

std::string to_string(PlaneKind k) {
  switch (k) {
    case PlaneKind::IonPlane: return "ion";
    case PlaneKind::FourierPlane: return "fourier";
    case PlaneKind::DetectorPlane: return "detector";
  }
  return "ion";
}

PlaneKind plane_kind_from_string(const std::string& s) {
  if (s == "ion") return PlaneKind::IonPlane;
  if (s == "fourier") return PlaneKind::FourierPlane;
  if (s == "detector") return PlaneKind::DetectorPlane;
  throw std::invalid_argument("unknown plane kind: " + s);
}

ComplexField2D::ComplexField2D(int nx, int ny, double dx, double dy, PlaneKind kind)
    : nx_(nx), ny_(ny), dx_(dx), dy_(dy), plane_(kind) {
  if (!is_pow2(nx) || !is_pow2(ny))
    throw std::invalid_argument("field grid sizes must be powers of two >= 2");
  if (!(dx > 0.0) || !(dy > 0.0)) throw std::invalid_argument("field pitch must be positive");
  samples_.assign(static_cast<size_t>(nx_) * ny_, Complex(0.0, 0.0));
}

double ComplexField2D::total_power() const {
  double acc = 0.0;
  for (const auto& s : samples_) acc += std::norm(s);
  return acc * dx_ * dy_;
}

double ComplexField2D::max_abs() const {
  double m = 0.0;
  for (const auto& s : samples_) m = std::max(m, std::abs(s));
  return m;
}

bool ComplexField2D::all_finite() const {
  for (const auto& s : samples_)
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return false;
  return true;
}

std::pair<int, int> ComplexField2D::peak_index() const {
  size_t best = 0;
  double bestv = -1.0;
  for (size_t i = 0; i < samples_.size(); ++i) {
    double v = std::norm(samples_[i]);
    if (v > bestv) {
      bestv = v;
      best = i;
    }
  }
  int iy = static_cast<int>(best / nx_);
  int ix = static_cast<int>(best % nx_);
  return {ix, iy};
}

Vec2 ComplexField2D::peak_position() const {
  auto [ix, iy] = peak_index();
  return {x(ix), y(iy)};
}

Vec2 ComplexField2D::centroid() const {
  double wsum = 0.0, xs = 0.0, ys = 0.0;
  for (int iy = 0; iy < ny_; ++iy)
    for (int ix = 0; ix < nx_; ++ix) {
      double w = std::norm(at(ix, iy));
      wsum += w;
      xs += w * x(ix);
      ys += w * y(iy);
    }
  if (wsum == 0.0) return {0.0, 0.0};
  return {xs / wsum, ys / wsum};
}

ComplexField2D invert_coordinates(const ComplexField2D& f, PlaneKind out_kind) {
  ComplexField2D out(f.nx(), f.ny(), f.dx(), f.dy(), out_kind);
  for (int iy = 0; iy < f.ny(); ++iy) {
    int jy = (f.ny() - iy) % f.ny();
    for (int ix = 0; ix < f.nx(); ++ix) {
      int jx = (f.nx() - ix) % f.nx();
      out.at(ix, iy) = f.at(jx, jy);
    }
  }
  return out;
}

void write_field(const ComplexField2D& f, std::ostream& os) {
  char buf[64];
  os << "# " << f.nx() << " " << f.ny() << " ";
  std::snprintf(buf, sizeof buf, "%.17g %.17g", f.dx(), f.dy());
  os << buf << " " << to_string(f.plane()) << "\n";
  for (int iy = 0; iy < f.ny(); ++iy) {
    for (int ix = 0; ix < f.nx(); ++ix) {
      const auto& s = f.at(ix, iy);
      std::snprintf(buf, sizeof buf, "%.17g %.17g", s.real(), s.imag());
      if (ix) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

void write_field(const ComplexField2D& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_field(f, os);
}

ComplexField2D read_field(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.empty() || header[0] != '#')
    throw std::runtime_error("field file: missing header");
  std::istringstream hs(header.substr(1));
  int nx, ny;
  double dx, dy;
  std::string kind;
  if (!(hs >> nx >> ny >> dx >> dy >> kind)) throw std::runtime_error("field file: bad header");
  ComplexField2D f(nx, ny, dx, dy, plane_kind_from_string(kind));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      double re, im;
      if (!(is >> re >> im)) throw std::runtime_error("field file: truncated sample data");
      f.at(ix, iy) = {re, im};
    }
  return f;
}

ComplexField2D read_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_field(is);
}

}  // namespace slmsim
