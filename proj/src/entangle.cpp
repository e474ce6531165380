#include "slmsim/entangle.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace slmsim {

double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

std::vector<std::complex<double>> w_state_amplitudes(const DickeParams& params) {
  const int N = params.n_ions;
  const int n = params.n_excited;
  if (N < 1) throw std::domain_error("need at least one ion");
  if (N > 20) throw std::domain_error("dense state vectors are capped at N = 20");
  if (n < 0 || n > N) throw std::domain_error("excitation count must lie in [0, N]");
  std::vector<double> phases = params.phases;
  if (phases.empty()) phases.assign(N, 0.0);
  if (static_cast<int>(phases.size()) != N)
    throw std::domain_error("need one phase per ion");

  const double amp = 1.0 / std::sqrt(binomial_coefficient(N, n));
  std::vector<std::complex<double>> state(size_t{1} << N, {0.0, 0.0});
  for (size_t basis = 0; basis < state.size(); ++basis) {
    if (std::popcount(basis) != n) continue;
    double phi = 0.0;
    for (int alpha = 0; alpha < N; ++alpha)
      if (basis >> alpha & 1) phi += phases[alpha];
    state[basis] = std::polar(amp, phi);
  }
  return state;
}

double herald_fidelity(int n_ions, double p, bool* is_limit) {
  if (n_ions < 1) throw std::domain_error("need at least one ion");
  if (is_limit) *is_limit = false;
  if (p == 0.0) {
    if (is_limit) *is_limit = true;
    return 1.0;  // p -> 0 limit: a click is a single photon with certainty
  }
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("excitation probability must lie in [0, 1)");
  const double q = 1.0 - p;
  const double single = n_ions * p * std::pow(q, n_ions - 1);
  return single / (1.0 - std::pow(q, n_ions));
}

double success_probability(int n_ions, double p, const ProtocolBudget& budget) {
  if (n_ions < 1) throw std::domain_error("need at least one ion");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("excitation probability must lie in [0, 1]");
  if (budget.rho < 0.0) throw std::domain_error("optical efficiency must be >= 0");
  return budget.rho * n_ions * p * std::pow(1.0 - p, n_ions - 1);
}

double rate_estimate(int n_ions, double p, const ProtocolBudget& budget) {
  if (budget.duty_cycle_hz < 0.0) throw std::domain_error("duty cycle must be >= 0");
  return budget.duty_cycle_hz * success_probability(n_ions, p, budget);
}

double loss_budget(double collection, double transmission, double quantum_efficiency,
                   double eps1) {
  for (double v : {collection, transmission, quantum_efficiency, eps1})
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("efficiency factors must lie in [0, 1]");
  const double eps2 = collection * transmission * quantum_efficiency;
  return eps1 * eps2;
}

}  // namespace slmsim
