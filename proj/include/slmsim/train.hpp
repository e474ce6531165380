#pragma once

#include <vector>

#include "slmsim/geometry.hpp"

namespace slmsim {

/// Half-cavity optical train: wavelength, collection NA, the three lens focal
/// lengths, and the reflected-path amplitude/phase budget.
///
/// rho = slm_reflectivity * path_transmission scales the reflected field
/// amplitude; roundtrip_phase is the global phase psi accumulated to and from
/// the modulator. psi is kept explicit (never folded into a mask) because it
/// is the experimentally tunable knob.
class OpticalTrain {
 public:
  OpticalTrain(double wavelength, double numerical_aperture, double f1, double f2, double f3,
               double slm_reflectivity = 1.0, double path_transmission = 1.0,
               double roundtrip_phase = 0.0);

  double wavelength() const { return wavelength_; }
  double numerical_aperture() const { return na_; }
  double f1() const { return f1_; }
  double f2() const { return f2_; }
  double f3() const { return f3_; }
  double slm_reflectivity() const { return eps1_; }
  double path_transmission() const { return eps2_; }
  double roundtrip_phase() const { return psi_; }

  double rho() const { return eps1_ * eps2_; }
  /// Abbe-limited Gaussian image scale s = lambda / (2 NA).
  double psf_width() const { return wavelength_ / (2.0 * na_); }

  OpticalTrain with_roundtrip_phase(double psi) const;
  OpticalTrain with_reflectivity(double eps1, double eps2) const;

 private:
  double wavelength_, na_, f1_, f2_, f3_, eps1_, eps2_, psi_;
};

/// Ions in the focal plane: positions, per-ion drive phases, and the common
/// Gaussian image scale s.
struct IonChain {
  std::vector<Vec2> positions;      // m, ion plane
  std::vector<double> drive_phases; // rad
  double psf_width = 0.0;           // s, m

  int count() const { return static_cast<int>(positions.size()); }
  void validate() const;
};

/// n ions evenly spaced on the x axis, centred on the origin, equal phases.
IonChain make_linear_chain(int n, double spacing, double psf_width);

}  // namespace slmsim
