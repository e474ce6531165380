#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "slmsim/field.hpp"
#include "slmsim/geometry.hpp"
#include "slmsim/train.hpp"

namespace slmsim {

/// Linear pixel -> wavevector map: pixel (i, j) addresses
/// k = (kx0 + i dkx, ky0 + j dky). For a device in the Fourier plane of lens
/// f1 the physical map is k = 2 pi x_slm / (lambda f1).
struct KMapping {
  double kx0 = 0.0, dkx = 1.0;
  double ky0 = 0.0, dky = 1.0;

  double kx(int i) const { return kx0 + i * dkx; }
  double ky(int j) const { return ky0 + j * dky; }
};

/// Pixel geometry of a phase modulator together with the k-space cell it
/// addresses. pitch is the physical pixel pitch in metres (metadata when the
/// mask lives on a simulation grid).
struct MaskGeometry {
  int px = 0;
  int py = 0;
  double pitch = 0.0;
  KMapping map;
};

/// Mask geometry aligned with the Fourier grid of an ion-plane field sampled
/// on `g`: one mask pixel per Fourier sample, pitch back-derived through the
/// f1 mapping.
MaskGeometry mask_geometry_for(const GridSpec& g, const OpticalTrain& train);

/// Hardware-pitch geometry (pixels centred on the optical axis).
MaskGeometry hardware_mask_geometry(const OpticalTrain& train, int px, int py, double pitch);

/// Pixelised phase function m(k) = exp(i phase(k)), phases wrapped to
/// [0, 2 pi). quant_levels = 0 means continuous. Pixels whose phase was
/// undefined during synthesis (amplitude floor) carry a flag.
class SLMPhaseMask {
 public:
  SLMPhaseMask(const MaskGeometry& geom, int quant_levels = 0);

  int px() const { return geom_.px; }
  int py() const { return geom_.py; }
  double pitch() const { return geom_.pitch; }
  const KMapping& mapping() const { return geom_.map; }
  const MaskGeometry& geometry() const { return geom_; }
  int quant_levels() const { return quant_levels_; }

  double& phase(int i, int j) { return phases_[static_cast<size_t>(j) * geom_.px + i]; }
  double phase(int i, int j) const { return phases_[static_cast<size_t>(j) * geom_.px + i]; }
  std::vector<double>& phases() { return phases_; }
  const std::vector<double>& phases() const { return phases_; }

  void set_flag(int i, int j) { flags_[static_cast<size_t>(j) * geom_.px + i] = 1; }
  bool flagged(int i, int j) const { return flags_[static_cast<size_t>(j) * geom_.px + i] != 0; }
  long flagged_count() const;

  std::complex<double> value(int i, int j) const;
  /// Mask value at an arbitrary wavevector, nearest-pixel lookup.
  /// Throws GeometryError when (kx, ky) lies outside the pixel array by more
  /// than half a pixel.
  std::complex<double> value_at(double kx, double ky) const;
  double phase_at(double kx, double ky) const;

  /// True when this mask is sampled exactly on the Fourier grid of a field
  /// with `n` samples and pitch `dk` per axis (relative tolerance 1e-9).
  bool matches_fourier_grid(int nx, int ny, double dkx, double dky) const;

 private:
  MaskGeometry geom_;
  int quant_levels_;
  std::vector<double> phases_;
  std::vector<uint8_t> flags_;
};

/// Equal pie-slice partition of the Fourier plane, n sectors of angle
/// 2 pi / n starting at angular_offset. assignment[i] is the ion index served
/// by sector i (identity by default).
struct SectorLayout {
  int n_sectors = 1;
  double angular_offset = 0.0;
  std::vector<int> assignment;

  /// Sector containing direction (kx, ky). Sectors are half-open with the
  /// shared edge assigned to the lower sector index; the DC pixel goes to
  /// sector 0's edge rule via atan2(0, 0) = 0.
  int sector_of(double kx, double ky) const;
};

/// n equal sectors; throws std::domain_error for n < 1.
SectorLayout sector_partition(int n, double angular_offset = 0.0);

/// Sectored blazed mask for multi-ion image overlap: within the sector
/// assigned to ion j the phase is
///   wrap(phi_j + k . (r_j - r_d)),
/// a per-sector blazed grating steering ion j's reflected image onto the
/// detector point r_d. Throws ResolutionError when some required grating
/// period falls below 2 mask pixels.
SLMPhaseMask blazed_sector_mask(const IonChain& chain, Vec2 r_d, const SectorLayout& layout,
                                const std::vector<double>& sector_phases,
                                const MaskGeometry& geom);

/// Destructive-interference mask for an in-phase (real) source field:
///   phase(k) = wrap(-2 arg F(k)).
/// Input is the ion-plane field; its far field is taken internally. Pixels
/// with |F| below 1e-9 max|F| get phase 0 and a flag. With this mask the
/// composite field obeys u(r) = f(r) (1 + rho e^{i psi}); psi = pi is the
/// destructive setting under this sign convention.
SLMPhaseMask suppression_mask(const ComplexField2D& ion_plane_field, const OpticalTrain& train);
/// Same, starting from an already computed far field.
SLMPhaseMask suppression_mask_from_farfield(const ComplexField2D& farfield,
                                            const OpticalTrain& train);

/// Nearest-neighbour crosstalk of the modulator, modelled as a normalized
/// Gaussian kernel (sigma in pixels) smoothing the programmed phase pattern.
/// sigma_px = 0 disables it. The default is calibrated so that a period-8
/// blazed grating comes out at a diffraction efficiency of 0.83.
struct CrosstalkModel {
  double sigma_px = 0.0;
  static CrosstalkModel none() { return {0.0}; }
  static CrosstalkModel calibrated_default();
};

inline constexpr double kDefaultCrosstalkSigmaPx = 0.55;
inline CrosstalkModel CrosstalkModel::calibrated_default() { return {kDefaultCrosstalkSigmaPx}; }

/// Quantizes phases to `levels` uniform steps of 2 pi / levels (levels = 0
/// keeps them continuous; levels = 1 or negative is a domain error), then
/// applies the crosstalk kernel. Returns the processed mask and the
/// diffraction-efficiency estimate
///   eps1 = |< exp(i (phase_processed - phase_ideal)) >|^2,
/// the fraction of reflected power remaining in the programmed order.
std::pair<SLMPhaseMask, double> quantize_and_losses(const SLMPhaseMask& mask, int levels,
                                                    const CrosstalkModel& crosstalk);

/// Text dump: header `# px py pitch levels` (levels 0 = continuous), a second
/// comment line with the k mapping, then the wrapped phases row-major, one
/// mask row per line, 17 significant digits (bit-exact round trip).
void write_mask(const SLMPhaseMask& mask, const std::string& path);
void write_mask(const SLMPhaseMask& mask, std::ostream& os);
SLMPhaseMask read_mask(const std::string& path);
SLMPhaseMask read_mask(std::istream& is);

}  // namespace slmsim
