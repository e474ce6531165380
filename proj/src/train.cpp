#include "slmsim/train.hpp"

namespace slmsim {

OpticalTrain::OpticalTrain(double wavelength, double numerical_aperture, double f1, double f2,
                           double f3, double slm_reflectivity, double path_transmission,
                           double roundtrip_phase)
    : wavelength_(wavelength),
      na_(numerical_aperture),
      f1_(f1),
      f2_(f2),
      f3_(f3),
      eps1_(slm_reflectivity),
      eps2_(path_transmission),
      psi_(wrap_phase(roundtrip_phase)) {
  if (!(wavelength_ > 0.0)) throw std::invalid_argument("wavelength must be positive");
  if (!(na_ > 0.0 && na_ < 1.0)) throw std::invalid_argument("NA must lie in (0, 1)");
  if (!(f1_ > 0.0 && f2_ > 0.0 && f3_ > 0.0))
    throw std::invalid_argument("focal lengths must be positive");
  if (eps1_ < 0.0 || eps1_ > 1.0 || eps2_ < 0.0 || eps2_ > 1.0)
    throw std::invalid_argument("reflectivity/transmission must lie in [0, 1]");
}

OpticalTrain OpticalTrain::with_roundtrip_phase(double psi) const {
  OpticalTrain t = *this;
  t.psi_ = wrap_phase(psi);
  return t;
}

OpticalTrain OpticalTrain::with_reflectivity(double eps1, double eps2) const {
  return OpticalTrain(wavelength_, na_, f1_, f2_, f3_, eps1, eps2, psi_);
}

void IonChain::validate() const {
  if (positions.empty()) throw std::invalid_argument("ion chain is empty");
  if (positions.size() != drive_phases.size())
    throw std::invalid_argument("positions and drive_phases must have equal length");
  if (!(psf_width > 0.0)) throw std::invalid_argument("psf_width must be positive");
  for (size_t i = 0; i < positions.size(); ++i)
    for (size_t j = i + 1; j < positions.size(); ++j)
      if (positions[i].x == positions[j].x && positions[i].y == positions[j].y)
        throw std::invalid_argument("ion positions must be pairwise distinct");
}

IonChain make_linear_chain(int n, double spacing, double psf_width) {
  if (n < 1) throw std::invalid_argument("chain needs at least one ion");
  IonChain c;
  c.psf_width = psf_width;
  for (int i = 0; i < n; ++i) {
    c.positions.push_back({(i - 0.5 * (n - 1)) * spacing, 0.0});
    c.drive_phases.push_back(0.0);
  }
  return c;
}

}  // namespace slmsim
