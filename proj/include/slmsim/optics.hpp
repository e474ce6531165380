#pragma once

#include "slmsim/field.hpp"
#include "slmsim/mask.hpp"
#include "slmsim/train.hpp"

namespace slmsim {

/// Propagation chain of the half-cavity imaging train, paraxial scalar model.
///
/// Transform convention (symmetric/unitary, 2D):
///   forward:  F(k) = sum_r f(r) exp(-i k.r) dx dy / (2 pi)
///   inverse:  f(r) = sum_k F(k) exp(+i k.r) dkx dky / (2 pi)
/// with the centred discrete grids k_m = (m - n/2) dk, dk = 2 pi / (n dx).
/// Power sum |.|^2 * pitch^2 is preserved exactly between planes, so all
/// energy bookkeeping is done in these units. Absolute intensity units are
/// arbitrary (the free-space Green's function prefactor is dropped); every
/// physical statement in this module is a ratio.

/// Source field of a chain of Gaussian emitters,
///   f(r) = sum_n exp(i phi_n) kappa exp(-|r - r_n|^2 / (4 s^2)),
/// kappa = 1/sqrt(2 pi s^2) so each single-ion image carries unit integrated
/// intensity. Throws ExtentError if the grid does not cover every ion with a
/// 6 s margin, UndersamplingError if s < 2 max(dx, dy).
ComplexField2D ion_source_field(const IonChain& chain, const GridSpec& grid);

/// Far field F(k) of an ion-plane field (one lens Fourier transform).
/// Parseval: total_power is preserved to ~1e-15 relative.
ComplexField2D forward_farfield(const ComplexField2D& f);

/// Inverse of forward_farfield (Fourier plane back to an image plane).
ComplexField2D inverse_farfield(const ComplexField2D& ff, PlaneKind out_kind = PlaneKind::IonPlane);

/// Field returning from the SLM into the ion plane,
///   f_m(r) = rho e^{i psi} (f * m)(-r),
/// computed as the inverse transform of rho e^{i psi} m(k) F(k) followed by
/// cyclic coordinate inversion. A flat mask (m == 1) reproduces the plain
/// mirror image f_m(r) = rho e^{i psi} f(-r).
ComplexField2D reflect_via_slm(const ComplexField2D& f, const SLMPhaseMask& mask,
                               const OpticalTrain& train);

/// Total field leaving the ion plane, u(r) = f(r) + f_m(r).
ComplexField2D composite_ion_plane_field(const ComplexField2D& f, const SLMPhaseMask& mask,
                                         const OpticalTrain& train);

/// Collimated far field after the second lens,
///   u~(k') = F(k') + rho e^{i psi} m(-k') F(-k'),
/// assembled directly in the Fourier plane. Equals
/// forward_farfield(composite_ion_plane_field(...)) to rounding.
ComplexField2D detector_farfield(const ComplexField2D& f, const SLMPhaseMask& mask,
                                 const OpticalTrain& train);

/// Imaged field on the camera, d(r') = u(-r').
ComplexField2D detector_image(const ComplexField2D& f, const SLMPhaseMask& mask,
                              const OpticalTrain& train);

}  // namespace slmsim
