#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ralab/errors.hpp"
#include "ralab/schedule.hpp"

namespace ralab {

// Linear ODE dx/dt = (C(s) + D) x + y with a skew-symmetric coherent part
// C(s) in rad/us, a constant dissipator D, and a constant source y. When the
// coherent part separates into two constant structure matrices scaled by the
// schedule (transverse and longitudinal), k_a/k_b plus omega_a/omega_b carry
// the split and enable the cached product-formula stepper.
struct LinearSystem {
  int dim = 0;
  std::function<Eigen::MatrixXd(double)> coherent_of_s;
  Eigen::MatrixXd dissipator;
  Eigen::VectorXd source;

  Eigen::MatrixXd k_a, k_b;
  std::function<double(double)> omega_a, omega_b;

  bool has_split() const { return k_a.size() > 0 && k_b.size() > 0; }
  // Checks dimensions and skew-symmetry of C(s) at a given s.
  void check(double s) const;
};

enum class StepMethod { diagonalization, product_formula };

struct StepPlan {
  double tau_us = 1e-3;
  StepMethod method = StepMethod::diagonalization;
};

StepMethod step_method_from_string(const std::string& name);
std::string to_string(StepMethod m);

// One segment propagator x -> phi*x + psi for a frozen generator.
struct AffinePropagator {
  Eigen::MatrixXd phi;
  Eigen::VectorXd psi;
};

// Spectral propagator for dx/dt = M x + y over tau: phi = R e^{tau L} R^-1,
// psi = R L^-1 (e^{tau L} - I) R^-1 y, with the zero-eigenvalue limit handled
// by a series. Throws IllConditionedError when cond(R) > 1e12 or the
// imaginary residue is not negligible.
AffinePropagator diag_propagator(const Eigen::MatrixXd& m,
                                 const Eigen::VectorXd& y, double tau);

// Single steps over [t, t+tau] at frozen s. These are the uncached reference
// entry points; propagate() uses cached equivalents internally.
Eigen::VectorXd step_diag(const LinearSystem& sys, const Eigen::VectorXd& x,
                          double s, double tau);
Eigen::VectorXd step_product_bloch(const LinearSystem& sys,
                                   const Eigen::VectorXd& x, double s,
                                   double tau);
Eigen::VectorXd step_product_twospin(const LinearSystem& sys,
                                     const Eigen::VectorXd& x, double s,
                                     double tau);

struct Trajectory {
  std::vector<double> t_us;            // snapped observer times
  std::vector<Eigen::VectorXd> states;  // one entry per observer
  double tau_us = 0.0;                  // effective step size
  long long steps = 0;
  StepMethod method_used = StepMethod::diagonalization;
  bool fallback_used = false;  // diagonalization handed over to the product
};

// Steps across the protocol with the generator frozen per step at the
// midpoint s value; records the state at the step boundary nearest each
// observer time. Empty observers record the final state only.
Trajectory propagate(const LinearSystem& sys, const StepPlan& plan,
                     const ReverseProtocol& protocol, const Eigen::VectorXd& x0,
                     const std::vector<double>& observers = {});

// Largest state distance over paired entries; trajectories must share
// observer times.
double sup_norm_diff(const Trajectory& a, const Trajectory& b);

}  // namespace ralab
