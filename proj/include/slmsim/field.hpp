#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "slmsim/geometry.hpp"

namespace slmsim {

enum class PlaneKind { IonPlane, FourierPlane, DetectorPlane };

std::string to_string(PlaneKind k);
PlaneKind plane_kind_from_string(const std::string& s);

/// Sampled complex scalar amplitude on a uniform 2D grid.
///
/// Storage is row-major: index = iy * nx + ix. Sample (ix, iy) sits at
/// physical coordinate ((ix - nx/2) * dx, (iy - ny/2) * dy); the pitch is in
/// metres on spatial planes and rad/m on the Fourier plane. Grid sizes are
/// required to be powers of two (>= 2) so the spectral transforms stay fast.
class ComplexField2D {
 public:
  using Complex = std::complex<double>;

  ComplexField2D(int nx, int ny, double dx, double dy, PlaneKind kind);

  static ComplexField2D zeros(const GridSpec& g, PlaneKind kind) {
    return ComplexField2D(g.nx, g.ny, g.dx, g.dy, kind);
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  PlaneKind plane() const { return plane_; }
  GridSpec grid() const { return GridSpec{nx_, ny_, dx_, dy_}; }

  double x(int ix) const { return (ix - nx_ / 2) * dx_; }
  double y(int iy) const { return (iy - ny_ / 2) * dy_; }

  Complex& at(int ix, int iy) { return samples_[static_cast<size_t>(iy) * nx_ + ix]; }
  const Complex& at(int ix, int iy) const { return samples_[static_cast<size_t>(iy) * nx_ + ix]; }

  std::vector<Complex>& samples() { return samples_; }
  const std::vector<Complex>& samples() const { return samples_; }

  /// Total power sum |s|^2 * dx * dy in this plane's own pitch units.
  double total_power() const;
  double max_abs() const;
  bool all_finite() const;

  /// Index of the brightest sample and its coordinates.
  std::pair<int, int> peak_index() const;
  Vec2 peak_position() const;

  /// Intensity-weighted centroid (first moment of |s|^2).
  Vec2 centroid() const;

 private:
  int nx_, ny_;
  double dx_, dy_;
  PlaneKind plane_;
  std::vector<Complex> samples_;
};

/// Cyclic coordinate inversion r -> -r about the grid centre: sample index
/// j maps to (n - j) mod n on each axis. The j = 0 row/column maps to itself
/// (its mirror point is off-grid on an even grid); fields are expected to
/// decay at the boundary, so that row carries negligible power.
ComplexField2D invert_coordinates(const ComplexField2D& f, PlaneKind out_kind);

/// Text dump: one-line header `# nx ny dx dy plane_kind`, then row-major
/// samples as "re im" pairs, one grid row per line, 17 significant digits
/// (round-trips bit-exactly).
void write_field(const ComplexField2D& f, const std::string& path);
void write_field(const ComplexField2D& f, std::ostream& os);
ComplexField2D read_field(const std::string& path);
ComplexField2D read_field(std::istream& is);

}  // namespace slmsim
