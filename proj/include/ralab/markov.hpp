#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ralab/errors.hpp"
#include "ralab/lindblad2.hpp"

namespace ralab {

// Kernel of the rate matrix is not one-dimensional; carries a basis of the
// stationary subspace.
struct DegenerateKernelError : NumericalError {
  DegenerateKernelError(const std::string& what,
                        std::vector<Eigen::VectorXd> basis_in)
      : NumericalError(what), basis(std::move(basis_in)) {}
  std::vector<Eigen::VectorXd> basis;
};

// Validates the rate-matrix invariants: square, nonnegative off-diagonal,
// columns summing to zero within 1e-12.
void check_rate_matrix(const Eigen::MatrixXd& w);

// Validates a probability vector: nonnegative entries summing to 1.
void check_prob_vector(const Eigen::VectorXd& p);

// W = [[-g2, g1], [g2, -g1]] on (p_up, p_down).
Eigen::MatrixXd build_two_level(double g1, double g2);

// Four-level flow on (p_uu, p_ud, p_du, p_dd): state uu exchanges with each
// of the others; g3 does not enter the diagonal dynamics.
Eigen::MatrixXd build_four_level(const RateSet& rates);

// exp(tW) p0 via eigendecomposition, falling back to scaling-and-squaring
// when the eigenvector matrix is ill-conditioned. Result drift off the
// simplex beyond 1e-12 is an error; smaller drift renormalizes.
Eigen::VectorXd propagate_markov(const Eigen::MatrixXd& w,
                                 const Eigen::VectorXd& p0, double t);

// One-dimensional kernel of W, normalized to a probability vector.
Eigen::VectorXd stationary(const Eigen::MatrixXd& w, double tol = 1e-10);

// Mean energy <E> = sum_k E_k p_k for level energies.
double mean_energy(const std::vector<double>& energies,
                   const Eigen::VectorXd& p);

}  // namespace ralab
