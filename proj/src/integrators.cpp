#include "ralab/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <unsupported/Eigen/MatrixFunctions>

namespace ralab {
namespace {

constexpr double kCondLimit = 1e12;
constexpr double kSeriesCut = 1e-8;

double norm1(const Eigen::MatrixXcd& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

// (e^{z} - 1)/z with the small-z series continuation.
std::complex<double> phi1(std::complex<double> z) {
  if (std::abs(z) < kSeriesCut) {
    return 1.0 + z / 2.0 + z * z / 6.0;
  }
  return (std::exp(z) - 1.0) / z;
}

struct Spectral {
  Eigen::MatrixXcd v;
  Eigen::MatrixXcd v_inv;
  Eigen::VectorXcd lam;
  double cond = 0.0;
};

Spectral decompose(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw IllConditionedError("eigendecomposition failed",
                              std::numeric_limits<double>::infinity());
  }
  Spectral sp;
  sp.v = es.eigenvectors();
  sp.lam = es.eigenvalues();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sp.v);
  sp.v_inv = lu.solve(Eigen::MatrixXcd::Identity(m.rows(), m.cols()));
  sp.cond = norm1(sp.v) * norm1(sp.v_inv);
  if (!(sp.cond < kCondLimit)) {
    throw IllConditionedError(
        "eigenvector matrix condition number exceeds 1e12", sp.cond);
  }
  return sp;
}

AffinePropagator from_spectral(const Spectral& sp, const Eigen::VectorXd& y,
                               double tau) {
  int n = static_cast<int>(sp.lam.size());
  Eigen::VectorXcd ex(n), ph(n);
  for (int i = 0; i < n; ++i) {
    std::complex<double> z = sp.lam(i) * tau;
    ex(i) = std::exp(z);
    ph(i) = tau * phi1(z);
  }
  Eigen::MatrixXcd phi_c = sp.v * ex.asDiagonal() * sp.v_inv;
  double scale = std::max(1.0, phi_c.cwiseAbs().maxCoeff());
  if (phi_c.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw IllConditionedError("imaginary residue above threshold", sp.cond);
  }
  AffinePropagator p;
  p.phi = phi_c.real();
  if (y.size() > 0 && y.cwiseAbs().maxCoeff() > 0.0) {
    p.psi = (sp.v * ph.asDiagonal() * sp.v_inv * y).real();
  } else {
    p.psi = Eigen::VectorXd::Zero(p.phi.rows());
  }
  return p;
}

// Axis-angle rotation exp(tau * C) for the skew field matrix C = -[B]_x.
Eigen::Matrix3d field_rotation(const Eigen::Vector3d& b, double tau) {
  double mag = b.norm();
  if (mag * tau == 0.0) return Eigen::Matrix3d::Identity();
  Eigen::Vector3d u = -b / mag;
  double theta = mag * tau;
  Eigen::Matrix3d k;
  k << 0, -u.z(), u.y(), u.z(), 0, -u.x(), -u.y(), u.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * (k * k);
}

Eigen::Vector3d field_from_coherent(const Eigen::MatrixXd& c) {
  // C = [[0, Bz, -By], [-Bz, 0, Bx], [By, -Bx, 0]]
  return {c(1, 2), -c(0, 2), c(0, 1)};
}

// Spectral apply with an expm fallback when the decomposition is unreliable.
class CachedExp {
 public:
  explicit CachedExp(const Eigen::MatrixXd& m) : m_(m) {
    try {
      sp_ = std::make_unique<Spectral>(decompose(m));
      Eigen::MatrixXcd rec =
          sp_->v * sp_->lam.asDiagonal() * sp_->v_inv;
      double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
      if ((rec.real() - m).cwiseAbs().maxCoeff() > 1e-10 * scale ||
          rec.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
        sp_.reset();
      }
    } catch (const IllConditionedError&) {
      sp_.reset();
    }
  }

  Eigen::MatrixXd exp_scaled(double factor) const {
    if (sp_) {
      Eigen::VectorXcd ex = (sp_->lam.array() * factor).exp();
      Eigen::MatrixXcd r = sp_->v * ex.asDiagonal() * sp_->v_inv;
      return r.real();
    }
    return (factor * m_).exp();
  }

 private:
  Eigen::MatrixXd m_;
  std::unique_ptr<Spectral> sp_;
};

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void apply(Eigen::VectorXd& x, double s, double tau) = 0;
};

class DiagStepper : public Stepper {
 public:
  explicit DiagStepper(const LinearSystem& sys) : sys_(&sys) {}

  void apply(Eigen::VectorXd& x, double s, double tau) override {
    if (!(cached_ && s == cached_s_ && tau == cached_tau_)) {
      prop_ = diag_propagator(sys_->coherent_of_s(s) + sys_->dissipator,
                              sys_->source, tau);
      cached_s_ = s;
      cached_tau_ = tau;
      cached_ = true;
    }
    x = prop_.phi * x + prop_.psi;
  }

 private:
  const LinearSystem* sys_;
  bool cached_ = false;
  double cached_s_ = 0.0, cached_tau_ = 0.0;
  AffinePropagator prop_;
};

class ProductBlochStepper : public Stepper {
 public:
  explicit ProductBlochStepper(const LinearSystem& sys) : sys_(&sys) {
    if (sys.dim != 3) throw InputError("Bloch product stepper needs dim 3");
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i != j && sys.dissipator(i, j) != 0.0) {
          throw InputError("Bloch product stepper needs a diagonal damping");
        }
      }
    }
  }

  void apply(Eigen::VectorXd& x, double s, double tau) override {
    if (!(cached_ && s == cached_s_ && tau == cached_tau_)) {
      Eigen::Vector3d half_damp;
      for (int i = 0; i < 3; ++i) {
        half_damp(i) = std::exp(0.5 * tau * sys_->dissipator(i, i));
      }
      Eigen::Vector3d b = field_from_coherent(sys_->coherent_of_s(s));
      Eigen::Matrix3d rot = field_rotation(b, tau);
      phi_ = half_damp.asDiagonal() * rot * half_damp.asDiagonal();
      cached_s_ = s;
      cached_tau_ = tau;
      cached_ = true;
    }
    // trapezium source: x' = phi (x + tau/2 y) + tau/2 y
    Eigen::Vector3d half_src = 0.5 * tau * sys_->source;
    x = phi_ * (x + half_src) + half_src;
  }

 private:
  const LinearSystem* sys_;
  bool cached_ = false;
  double cached_s_ = 0.0, cached_tau_ = 0.0;
  Eigen::Matrix3d phi_;
};

class ProductSplitStepper : public Stepper {
 public:
  explicit ProductSplitStepper(const LinearSystem& sys)
      : sys_(&sys), exp_a_(sys.k_a), exp_b_(sys.k_b), exp_d_(sys.dissipator) {
    if (!sys.has_split()) {
      throw InputError(
          "product stepper needs the transverse/longitudinal split");
    }
  }

  void apply(Eigen::VectorXd& x, double s, double tau) override {
    if (!(cached_ && s == cached_s_ && tau == cached_tau_)) {
      double wa = sys_->omega_a(s), wb = sys_->omega_b(s);
      Eigen::MatrixXd ea = exp_a_.exp_scaled(0.5 * tau * wa);
      Eigen::MatrixXd eb = exp_b_.exp_scaled(0.5 * tau * wb);
      if (tau != cached_tau_ || !cached_) {
        ed_ = exp_d_.exp_scaled(tau);
      }
      phi_ = ea * (eb * (ed_ * (eb * ea)));
      cached_s_ = s;
      cached_tau_ = tau;
      cached_ = true;
    }
    Eigen::VectorXd half_src = 0.5 * tau * sys_->source;
    x = phi_ * (x + half_src) + half_src;
  }

 private:
  const LinearSystem* sys_;
  CachedExp exp_a_, exp_b_, exp_d_;
  bool cached_ = false;
  double cached_s_ = 0.0, cached_tau_ = 0.0;
  Eigen::MatrixXd phi_, ed_;
};

std::unique_ptr<Stepper> make_product_stepper(const LinearSystem& sys) {
  if (sys.has_split()) {
    return std::make_unique<ProductSplitStepper>(sys);
  }
  if (sys.dim == 3) return std::make_unique<ProductBlochStepper>(sys);
  throw InputError(
      "product formula needs dim 3 or a split coherent part");
}

}  // namespace

void LinearSystem::check(double s) const {
  if (dim <= 0) throw InputError("linear system has no dimension");
  if (dissipator.rows() != dim || dissipator.cols() != dim ||
      source.size() != dim) {
    throw InputError("linear system block dimensions disagree");
  }
  Eigen::MatrixXd c = coherent_of_s(s);
  if (c.rows() != dim || c.cols() != dim) {
    throw InputError("coherent part has wrong dimensions");
  }
  double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c + c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NumericalError("coherent part is not skew-symmetric");
  }
}

StepMethod step_method_from_string(const std::string& name) {
  if (name == "diagonalization" || name == "diag") {
    return StepMethod::diagonalization;
  }
  if (name == "product_formula" || name == "product") {
    return StepMethod::product_formula;
  }
  throw InputError("unknown step method '" + name + "'");
}

std::string to_string(StepMethod m) {
  return m == StepMethod::diagonalization ? "diagonalization"
                                          : "product_formula";
}

AffinePropagator diag_propagator(const Eigen::MatrixXd& m,
                                 const Eigen::VectorXd& y, double tau) {
  return from_spectral(decompose(m), y, tau);
}

Eigen::VectorXd step_diag(const LinearSystem& sys, const Eigen::VectorXd& x,
                          double s, double tau) {
  DiagStepper st(sys);
  Eigen::VectorXd out = x;
  st.apply(out, s, tau);
  return out;
}

Eigen::VectorXd step_product_bloch(const LinearSystem& sys,
                                   const Eigen::VectorXd& x, double s,
                                   double tau) {
  ProductBlochStepper st(sys);
  Eigen::VectorXd out = x;
  st.apply(out, s, tau);
  return out;
}

Eigen::VectorXd step_product_twospin(const LinearSystem& sys,
                                     const Eigen::VectorXd& x, double s,
                                     double tau) {
  ProductSplitStepper st(sys);
  Eigen::VectorXd out = x;
  st.apply(out, s, tau);
  return out;
}

Trajectory propagate(const LinearSystem& sys, const StepPlan& plan,
                     const ReverseProtocol& protocol,
                     const Eigen::VectorXd& x0,
                     const std::vector<double>& observers) {
  validate_protocol(protocol, /*allow_long=*/true);
  if (!(plan.tau_us > 0.0)) throw InputError("step size must be positive");
  if (x0.size() != sys.dim) {
    throw InputError("initial state dimension mismatch");
  }
  double t_end = protocol.t_end_us();
  sys.check(s_of_t(protocol, 0.0));

  Trajectory traj;
  traj.method_used = plan.method;

  long long n_steps = std::max(1ll, std::llround(t_end / plan.tau_us));
  double tau = t_end / static_cast<double>(n_steps);
  traj.tau_us = tau;
  traj.steps = n_steps;

  // one slot per observer, snapped to the nearest step boundary
  std::vector<double> obs = observers;
  if (obs.empty()) obs.push_back(t_end);
  std::vector<long long> obs_idx(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i] < -1e-12 || obs[i] > t_end * (1.0 + 1e-12) + 1e-12) {
      throw InputError("observer time outside protocol span");
    }
    obs_idx[i] = std::clamp(std::llround(obs[i] / tau), 0ll, n_steps);
  }
  traj.t_us.resize(obs.size());
  traj.states.resize(obs.size());

  std::unique_ptr<Stepper> stepper;
  bool can_fall_back = false;
  if (plan.method == StepMethod::product_formula) {
    stepper = make_product_stepper(sys);
  } else {
    stepper = std::make_unique<DiagStepper>(sys);
    can_fall_back = sys.has_split() || sys.dim == 3;
  }

  // (index, slot) pairs sorted by index so recording is a pointer advance
  std::vector<std::pair<long long, std::size_t>> slots(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) slots[i] = {obs_idx[i], i};
  std::sort(slots.begin(), slots.end());

  Eigen::VectorXd x = x0;
  std::size_t next = 0;
  auto record = [&](long long idx) {
    while (next < slots.size() && slots[next].first == idx) {
      traj.t_us[slots[next].second] = static_cast<double>(idx) * tau;
      traj.states[slots[next].second] = x;
      ++next;
    }
  };
  record(0);
  for (long long n = 0; n < n_steps; ++n) {
    double s_mid = s_of_t(protocol, (static_cast<double>(n) + 0.5) * tau);
    try {
      stepper->apply(x, s_mid, tau);
    } catch (const IllConditionedError&) {
      if (!can_fall_back) throw;
      stepper = make_product_stepper(sys);
      traj.method_used = StepMethod::product_formula;
      traj.fallback_used = true;
      stepper->apply(x, s_mid, tau);
    }
    record(n + 1);
  }
  return traj;
}

double sup_norm_diff(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) {
    throw InputError("trajectories have different observer counts");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    m = std::max(m,
                 (a.states[i] - b.states[i]).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace ralab
