#pragma once

#include <utility>
#include <vector>

#include "ralab/problems.hpp"
#include "ralab/schedule.hpp"

namespace ralab {

// Gibbs weights over spectrum levels: p_i proportional to
// g_i * exp(-beta * (E_i - E_min)); the shift keeps exponents bounded.
std::vector<double> gibbs_level_probs(const Spectrum& spec, double beta);

// Per-state probability for each level (level probability / degeneracy).
std::vector<double> gibbs_state_probs_per_level(const Spectrum& spec,
                                                double beta);

// Probability of every configuration in canonical index order (n <= 24).
std::vector<double> gibbs_probs_per_state(const IsingProblem& p, double beta);

// Inverse of the monotone map beta -> ground-level probability, solved by
// bisection to tolerance tol_p in probability.
double effective_beta(double p0, const Spectrum& spec, double tol_p = 1e-10);

double beta_to_temperature_mk(double beta,
                              const TemperatureConversion& conv = {});
double temperature_mk_to_beta(double t_mk,
                              const TemperatureConversion& conv = {});

// Mean Gibbs energy of the open uniform chain: -J*(n-1)*tanh(beta*J).
double chain_mean_energy(int n, double J, double beta);

struct BetaFitResult {
  double beta = 0.0;
  double sse = 0.0;
};

// Scalar least-squares fit of chain_mean_energy to (n, mean energy) data by
// golden-section search on [beta_lo, beta_hi].
BetaFitResult fit_beta_to_energies(
    const std::vector<std::pair<int, double>>& data, double J,
    double beta_lo = 0.0, double beta_hi = 100.0, double tol = 1e-8);

}  // namespace ralab
