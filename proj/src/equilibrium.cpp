#include "ralab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ralab {
namespace {

void check_beta(double beta) {
  if (!(beta >= 0.0)) throw InputError("beta must be >= 0");
}

}  // namespace

std::vector<double> gibbs_level_probs(const Spectrum& spec, double beta) {
  check_beta(beta);
  if (spec.levels.empty()) throw InputError("empty spectrum");
  double e_min = spec.ground_energy();
  // log-sum-exp: huge chain degeneracies would overflow a direct sum
  std::vector<double> lw(spec.levels.size());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    const auto& l = spec.levels[i];
    lw[i] = std::log(l.degeneracy) - beta * (l.energy - e_min);
    m = std::max(m, lw[i]);
  }
  std::vector<double> w(spec.levels.size());
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(lw[i] - m);
    z += w[i];
  }
  for (auto& x : w) x /= z;
  return w;
}

std::vector<double> gibbs_state_probs_per_level(const Spectrum& spec,
                                                double beta) {
  auto p = gibbs_level_probs(spec, beta);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] /= spec.levels[i].degeneracy;
  }
  return p;
}

std::vector<double> gibbs_probs_per_state(const IsingProblem& p, double beta) {
  check_beta(beta);
  p.validate();
  if (p.n > kMaxEnumerationSpins) {
    throw CapabilityError("per-state probabilities limited to " +
                          std::to_string(kMaxEnumerationSpins) + " spins");
  }
  std::uint32_t total = 1u << p.n;
  std::vector<double> e(total);
  double e_min = 0.0;
  for (std::uint32_t idx = 0; idx < total; ++idx) {
    e[idx] = energy(p, spins_from_index(idx, p.n));
    e_min = idx == 0 ? e[idx] : std::min(e_min, e[idx]);
  }
  double z = 0.0;
  std::vector<double> probs(total);
  for (std::uint32_t idx = 0; idx < total; ++idx) {
    probs[idx] = std::exp(-beta * (e[idx] - e_min));
    z += probs[idx];
  }
  for (auto& x : probs) x /= z;
  return probs;
}

double effective_beta(double p0, const Spectrum& spec, double tol_p) {
  if (spec.levels.size() < 2) {
    throw InputError("effective beta needs at least 2 levels");
  }
  double uniform = spec.levels.front().degeneracy / spec.total_states();
  if (!(p0 > uniform - 1e-15 && p0 < 1.0)) {
    throw InputError("ground probability outside attainable range (" +
                     std::to_string(uniform) + ", 1)");
  }
  auto p_ground = [&spec](double beta) {
    return gibbs_level_probs(spec, beta).front();
  };
  if (p0 <= uniform) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (p_ground(hi) < p0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {
      throw InputError("ground probability unattainably close to 1");
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    double pm = p_ground(mid);
    if (std::abs(pm - p0) < tol_p) return mid;
    (pm < p0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double beta_to_temperature_mk(double beta, const TemperatureConversion& conv) {
  return conv.beta_to_temperature_mk(beta);
}

double temperature_mk_to_beta(double t_mk, const TemperatureConversion& conv) {
  return conv.temperature_mk_to_beta(t_mk);
}

double chain_mean_energy(int n, double J, double beta) {
  if (n < 2) throw InputError("chain needs n >= 2");
  check_beta(beta);
  return -J * (n - 1) * std::tanh(beta * J);
}

BetaFitResult fit_beta_to_energies(
    const std::vector<std::pair<int, double>>& data, double J, double beta_lo,
    double beta_hi, double tol) {
  if (data.size() < 2) throw InputError("beta fit needs at least 2 points");
  bool all_zero = true;
  for (const auto& [n, e] : data) {
    if (n < 2) throw InputError("beta fit needs chain lengths >= 2");
    if (e != 0.0) all_zero = false;
  }
  if (all_zero || J == 0.0) {
    throw NumericalError("beta fit is degenerate: flat model or zero data");
  }
  auto sse = [&](double beta) {
    double s = 0.0;
    for (const auto& [n, e] : data) {
      double d = e - chain_mean_energy(n, J, beta);
      s += d * d;
    }
    return s;
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = beta_lo, b = beta_hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = sse(x1), f2 = sse(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = sse(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = sse(x2);
    }
  }
  BetaFitResult r;
  r.beta = 0.5 * (a + b);
  r.sse = sse(r.beta);
  return r;
}

}  // namespace ralab
