#include "ralab/markov.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace ralab {

void check_rate_matrix(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() < 1) {
    throw InputError("rate matrix must be square");
  }
  double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  for (int j = 0; j < w.cols(); ++j) {
    double col = 0.0;
    for (int i = 0; i < w.rows(); ++i) {
      if (i != j && w(i, j) < -1e-12 * scale) {
        throw InputError("rate matrix has a negative off-diagonal entry");
      }
      col += w(i, j);
    }
    if (std::abs(col) > 1e-12 * scale) {
      throw InputError("rate matrix columns must sum to zero");
    }
  }
}

void check_prob_vector(const Eigen::VectorXd& p) {
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) < -1e-12) throw InputError("probability vector has a negative entry");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) {
    throw InputError("probability vector must sum to 1");
  }
}

Eigen::MatrixXd build_two_level(double g1, double g2) {
  if (g1 < 0.0 || g2 < 0.0) throw InputError("rates must be nonnegative");
  Eigen::MatrixXd w(2, 2);
  w << -g2, g1, g2, -g1;
  return w;
}

Eigen::MatrixXd build_four_level(const RateSet& r) {
  r.validate();
  Eigen::MatrixXd w(4, 4);
  w << -(r.g2 + r.g5 + r.g7), r.g6, r.g4, r.g1,
       r.g7, -r.g6, 0.0, 0.0,
       r.g5, 0.0, -r.g4, 0.0,
       r.g2, 0.0, 0.0, -r.g1;
  return w;
}

Eigen::VectorXd propagate_markov(const Eigen::MatrixXd& w,
                                 const Eigen::VectorXd& p0, double t) {
  check_rate_matrix(w);
  if (p0.size() != w.rows()) {
    throw InputError("probability vector dimension mismatch");
  }
  check_prob_vector(p0);
  if (t < 0.0) throw InputError("time must be nonnegative");
  if (t == 0.0) return p0;

  Eigen::VectorXd p;
  bool spectral_ok = false;
  {
    Eigen::EigenSolver<Eigen::MatrixXd> es(w);
    if (es.info() == Eigen::Success) {
      Eigen::MatrixXcd v = es.eigenvectors();
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
      Eigen::MatrixXcd v_inv =
          lu.solve(Eigen::MatrixXcd::Identity(w.rows(), w.cols()));
      double cond = v.cwiseAbs().colwise().sum().maxCoeff() *
                    v_inv.cwiseAbs().colwise().sum().maxCoeff();
      if (cond < 1e12) {
        Eigen::VectorXcd ex = (es.eigenvalues().array() * t).exp();
        Eigen::VectorXcd pc = v * (ex.asDiagonal() * (v_inv * p0));
        if (pc.imag().cwiseAbs().maxCoeff() < 1e-9) {
          p = pc.real();
          spectral_ok = std::abs(p.sum() - 1.0) <= 1e-12;
        }
      }
    }
  }
  if (!spectral_ok) {
    p = (t * w).exp() * p0;
  }
  double drift = std::abs(p.sum() - 1.0);
  if (drift > 1e-12) {
    throw NumericalError("probability drift " + std::to_string(drift) +
                         " after propagation");
  }
  p /= p.sum();
  return p;
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& w, double tol) {
  check_rate_matrix(w);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(w);
  lu.setThreshold(tol);
  Eigen::MatrixXd kernel = lu.kernel();
  if (lu.dimensionOfKernel() != 1) {
    std::vector<Eigen::VectorXd> basis;
    for (int c = 0; c < kernel.cols(); ++c) basis.push_back(kernel.col(c));
    throw DegenerateKernelError(
        "stationary space has dimension " +
            std::to_string(lu.dimensionOfKernel()),
        std::move(basis));
  }
  Eigen::VectorXd v = kernel.col(0);
  double s = v.sum();
  if (std::abs(s) < 1e-14) {
    throw NumericalError("kernel vector sums to zero; cannot normalize");
  }
  v /= s;
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) < -1e-10) {
      throw NumericalError("stationary vector has a negative entry");
    }
    if (v(i) < 0.0) v(i) = 0.0;
  }
  return v / v.sum();
}

double mean_energy(const std::vector<double>& energies,
                   const Eigen::VectorXd& p) {
  if (static_cast<int>(energies.size()) != p.size()) {
    throw InputError("energy/probability length mismatch");
  }
  double e = 0.0;
  for (int i = 0; i < p.size(); ++i) e += energies[i] * p(i);
  return e;
}

}  // namespace ralab
