#pragma once

#include <complex>
#include <vector>

namespace slmsim {

/// Symmetric Dicke sector parameters: N ions, n of them flipped to the
/// excited ground state, per-ion drive phases phi_alpha.
struct DickeParams {
  int n_ions = 1;
  int n_excited = 0;
  double p = 0.0;
  std::vector<double> phases;  // size n_ions; empty means all zero
};

/// Optical efficiency and repetition rate of the heralding protocol.
struct ProtocolBudget {
  double rho = 1.0;            // total optical efficiency
  double duty_cycle_hz = 0.0;  // attempts per second
};

/// Dense state vector of |W_{n,N-n}> over the 2^N computational basis: ion
/// alpha excited <=> bit alpha of the basis index set. Every basis string
/// with exactly n excited ions carries amplitude
///   binom(N, n)^{-1/2} exp(i sum_{alpha excited} phi_alpha),
/// all others zero. Requires N <= 20 (dense feasibility), 0 <= n <= N.
std::vector<std::complex<double>> w_state_amplitudes(const DickeParams& params);

/// Herald fidelity of the single-photon-detection protocol,
///   F = N p (1-p)^{N-1} / (1 - (1-p)^N),
/// the probability that a click came from exactly one emitted photon.
/// p = 0 returns the limit value 1 (sets *is_limit when provided);
/// p = 1 or p outside [0, 1] throws std::domain_error.
double herald_fidelity(int n_ions, double p, bool* is_limit = nullptr);

/// P_succ = rho N p (1-p)^{N-1}.
double success_probability(int n_ions, double p, const ProtocolBudget& budget);

/// Heralds per second: duty cycle x success probability.
double rate_estimate(int n_ions, double p, const ProtocolBudget& budget);

/// Detection-path budget: eps2 = collection x transmission x qe, rho = eps1 eps2.
double loss_budget(double collection, double transmission, double quantum_efficiency,
                   double eps1);

double binomial_coefficient(int n, int k);

}  // namespace slmsim
