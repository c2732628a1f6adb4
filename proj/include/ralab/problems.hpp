#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ralab/errors.hpp"

namespace ralab {

// Ising energy E(sigma) = sum_i h_i sigma_i + sum_{i>j} J_ij sigma_i sigma_j
// + offset, with sigma_i = +1 ("u", logical true) or -1 ("d").
struct IsingProblem {
  struct Coupling {
    int i = 0;  // normalized so that i > j
    int j = 0;
    double value = 0.0;
  };

  int n = 0;
  std::vector<double> h;
  std::vector<Coupling> couplings;
  double offset = 0.0;

  // Throws InputError on inconsistent sizes or out-of-range indices.
  void validate() const;
};

double energy(const IsingProblem& p, const std::vector<int>& spins);

// Canonical state index: spin 0 is the most significant digit, 0 bit = "u".
// For n = 2 this enumerates uu, ud, du, dd as indices 0..3.
std::vector<int> spins_from_index(std::uint32_t index, int n);
std::string state_label(std::uint32_t index, int n);
std::uint32_t index_from_label(const std::string& label);

inline constexpr int kMaxEnumerationSpins = 24;

// Exact level structure: distinct energies, degeneracies, one representative
// configuration per level (indices in canonical order).
struct SpectrumLevel {
  double energy = 0.0;
  double degeneracy = 0.0;
  std::uint32_t representative = 0;
};

struct Spectrum {
  int n = 0;
  std::vector<SpectrumLevel> levels;  // ascending energy

  double total_states() const;
  double ground_energy() const;
};

// Exhaustive enumeration; systems above kMaxEnumerationSpins raise
// CapabilityError. Energies closer than merge_tol collapse into one level.
Spectrum enumerate_spectrum(const IsingProblem& p, double merge_tol = 1e-9);

// Closed-form spectrum of the uniform open chain with n spins and coupling J:
// breaking k of the n-1 bonds costs -2kJ relative to the aligned states, so
// E_k = J*(n - 1 - 2k) with degeneracy 2*C(n-1, k). Valid for any n >= 2.
Spectrum chain_spectrum(int n, double J);

IsingProblem make_ferro_chain(int n, double J = -0.1);
IsingProblem make_single_spin(double h1);
// Two coupled spins with biases h*(1+lift), h*(1-lift) and coupling J.
IsingProblem make_two_spin(double h, double J, double lift = 0.0);

// 2-SAT clause as two nonzero literals; +v means variable v, -v its negation
// (variables are 1-based).
struct TwoSatClause {
  int lit1 = 0;
  int lit2 = 0;
};

struct TwoSatInstance {
  int n_vars = 0;
  std::vector<TwoSatClause> clauses;

  void validate() const;
  bool satisfied(const std::vector<int>& spins) const;  // +1 = true
};

// Text format: first non-comment line "n_vars n_clauses", then one clause per
// line as two signed integers. '#' starts a comment.
TwoSatInstance load_2sat(const std::string& path);
void save_2sat(const std::string& path, const TwoSatInstance& inst);

// Two independent equality chains over the variables (split as evenly as
// possible), each edge contributing (!a | b) & (a | !b). Every instance is
// satisfiable with exactly 4 solutions: each block all-true or all-false.
TwoSatInstance two_block_2sat(int n_vars);

// Standard penalty mapping: clause (l1 | l2) adds energy 1 on its single
// falsifying assignment, so ground states at energy 0 are exactly the
// satisfying assignments. Produces h, J in {-1/4 multiples} plus an offset.
IsingProblem map_2sat(const TwoSatInstance& inst);

// Named built-in problems: "1S(h)", "2S1", "2S2", "2S3", "chain(n)",
// "chain(n,J)", "2sat:<path>".
IsingProblem builtin_problem(const std::string& name);

}  // namespace ralab
