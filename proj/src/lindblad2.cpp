#include "ralab/lindblad2.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "ralab/equilibrium.hpp"

namespace ralab {
namespace {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using cd = std::complex<double>;

struct TwoSpinCoupling {
  double h1 = 0.0;
  double h2 = 0.0;
  double J = 0.0;
};

TwoSpinCoupling as_two_spin(const IsingProblem& p) {
  p.validate();
  if (p.n != 2) throw InputError("two-spin dynamics needs exactly 2 spins");
  TwoSpinCoupling c;
  c.h1 = p.h[0];
  c.h2 = p.h[1];
  for (const auto& cp : p.couplings) c.J += cp.value;
  return c;
}

Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
  Matrix4cd k;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    }
  }
  return k;
}

const std::array<Matrix2cd, 4>& paulis() {
  static const std::array<Matrix2cd, 4> p = [] {
    std::array<Matrix2cd, 4> m;
    m[0] << 1, 0, 0, 1;
    m[1] << 0, 1, 1, 0;
    m[2] << 0, cd(0, -1), cd(0, 1), 0;
    m[3] << 1, 0, 0, -1;
    return m;
  }();
  return p;
}

// Orthonormal basis e_k = kron(P_a, P_b)/2, row-major, Tr[e_k e_l] = d_kl.
const std::array<Matrix4cd, 16>& basis16() {
  static const std::array<Matrix4cd, 16> e = [] {
    std::array<Matrix4cd, 16> m;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        m[4 * a + b] = 0.5 * kron2(paulis()[a], paulis()[b]);
      }
    }
    return m;
  }();
  return e;
}

// Jump operators in the basis |uu>, |ud>, |du>, |dd> (spin 1 = left factor).
std::array<Matrix4cd, 7> jump_operators() {
  std::array<Matrix4cd, 7> l;
  for (auto& m : l) m.setZero();
  l[0](0, 3) = 1;                      // dd -> uu
  l[1](3, 0) = 1;                      // uu -> dd
  l[2] = kron2(paulis()[3], paulis()[3]);  // collective dephasing
  l[3](0, 2) = 1;                      // du -> uu
  l[4](2, 0) = 1;                      // uu -> du
  l[5](0, 1) = 1;                      // ud -> uu
  l[6](1, 0) = 1;                      // uu -> ud
  return l;
}

Matrix4cd hamiltonian(const TwoSpinCoupling& c, double omega_a,
                      double omega_b) {
  const auto& p = paulis();
  Matrix4cd hx = kron2(p[1], p[0]) + kron2(p[0], p[1]);
  Matrix4cd hz = c.h1 * kron2(p[3], p[0]) + c.h2 * kron2(p[0], p[3]) +
                 c.J * kron2(p[3], p[3]);
  return -omega_a * hx + omega_b * hz;
}

Matrix4cd lindblad_rhs(const Matrix4cd& h,
                       const std::array<Matrix4cd, 7>& l,
                       const RateSet& rates, const Matrix4cd& rho) {
  const cd i_unit(0.0, 1.0);
  Matrix4cd out = -i_unit * (h * rho - rho * h);
  const std::array<double, 7> g = {rates.g1, rates.g2, rates.g3, rates.g4,
                                   rates.g5, rates.g6, rates.g7};
  for (int k = 0; k < 7; ++k) {
    if (g[k] == 0.0) continue;
    Matrix4cd ld = l[k] * rho * l[k].adjoint();
    Matrix4cd anti = l[k].adjoint() * l[k] * rho + rho * l[k].adjoint() * l[k];
    out += g[k] * (ld - 0.5 * anti);
  }
  return out;
}

}  // namespace

void RateSet::validate() const {
  for (double g : {g1, g2, g3, g4, g5, g6, g7}) {
    if (g < 0.0) throw InputError("dissipation rates must be nonnegative");
  }
}

RateSet scaled(const RateSet& r, double factor) {
  if (factor < 0.0) throw InputError("rate scale factor must be nonnegative");
  return {r.g1 * factor, r.g2 * factor, r.g3 * factor, r.g4 * factor,
          r.g5 * factor, r.g6 * factor, r.g7 * factor};
}

RateSet load_rates_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open rate file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad JSON in " + path + ": " + e.what());
  }
  RateSet r;
  try {
    r.g1 = j.at("g1").get<double>();
    r.g2 = j.at("g2").get<double>();
    r.g3 = j.at("g3").get<double>();
    r.g4 = j.at("g4").get<double>();
    r.g5 = j.at("g5").get<double>();
    r.g6 = j.at("g6").get<double>();
    r.g7 = j.at("g7").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("rate file " + path + " missing entry: " + e.what());
  }
  std::string unit = j.value("unit", "per_us");
  if (unit == "Hz") {
    r = scaled(r, 1e-6);
  } else if (unit != "per_us") {
    throw InputError("unknown rate unit '" + unit +
                     "'; expected per_us or Hz");
  }
  r.validate();
  return r;
}

void save_rates_json(const std::string& path, const RateSet& r) {
  nlohmann::json j;
  j["g1"] = r.g1;
  j["g2"] = r.g2;
  j["g3"] = r.g3;
  j["g4"] = r.g4;
  j["g5"] = r.g5;
  j["g6"] = r.g6;
  j["g7"] = r.g7;
  j["unit"] = "per_us";
  std::ofstream out(path);
  if (!out) throw InputError("cannot write rate file: " + path);
  out << j.dump(2) << "\n";
}

Coeffs16 coeffs_from_state(const std::string& label) {
  std::uint32_t idx = index_from_label(label);
  if (label.size() != 2) throw InputError("two-spin label must have 2 chars");
  Matrix4cd rho = Matrix4cd::Zero();
  rho(idx, idx) = 1.0;
  return coeffs_from_density(rho);
}

Coeffs16 coeffs_from_probs(const Eigen::Vector4d& probs) {
  for (int i = 0; i < 4; ++i) {
    if (probs(i) < -1e-12) throw InputError("negative probability");
  }
  if (std::abs(probs.sum() - 1.0) > 1e-9) {
    throw InputError("probabilities must sum to 1");
  }
  Matrix4cd rho = Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) rho(i, i) = probs(i);
  return coeffs_from_density(rho);
}

Eigen::Vector4d probs_from_coeffs(const Coeffs16& x) {
  // p_{ab} = (x1 + a*x13 + b*x4 + ab*x16)/2 in 1-based labels; 0-based
  // indices 0, 12, 3, 15.
  double x1 = x(0), zi = x(12), iz = x(3), zz = x(15);
  Eigen::Vector4d p;
  p(0) = 0.5 * (x1 + zi + iz + zz);
  p(1) = 0.5 * (x1 + zi - iz - zz);
  p(2) = 0.5 * (x1 - zi + iz - zz);
  p(3) = 2.0 * x1 - p(0) - p(1) - p(2);  // closes the simplex exactly
  return p;
}

Eigen::Matrix4cd density_from_coeffs(const Coeffs16& x) {
  Matrix4cd rho = Matrix4cd::Zero();
  for (int k = 0; k < 16; ++k) rho += x(k) * basis16()[k];
  return rho;
}

Coeffs16 coeffs_from_density(const Eigen::Matrix4cd& rho) {
  Coeffs16 x;
  for (int k = 0; k < 16; ++k) {
    cd t = (basis16()[k] * rho).trace();
    if (std::abs(t.imag()) > 1e-10) {
      throw NumericalError("density matrix has non-real basis coefficients");
    }
    x(k) = t.real();
  }
  return x;
}

Eigen::MatrixXd generator16(const IsingProblem& two_spin, const RateSet& rates,
                            double omega_a, double omega_b) {
  rates.validate();
  TwoSpinCoupling c = as_two_spin(two_spin);
  Matrix4cd h = hamiltonian(c, omega_a, omega_b);
  auto l = jump_operators();
  Eigen::MatrixXd g(16, 16);
  for (int col = 0; col < 16; ++col) {
    Matrix4cd rhs = lindblad_rhs(h, l, rates, basis16()[col]);
    for (int row = 0; row < 16; ++row) {
      cd t = (basis16()[row] * rhs).trace();
      if (std::abs(t.imag()) > 1e-10) {
        throw NumericalError("generator entry has an imaginary part");
      }
      g(row, col) = t.real();
    }
  }
  return g;
}

TwoSpinGenerator build_two_spin_generator(const IsingProblem& two_spin,
                                          const RateSet& rates) {
  RateSet none;
  Eigen::MatrixXd ga = generator16(two_spin, none, 1.0, 0.0);
  Eigen::MatrixXd gb = generator16(two_spin, none, 0.0, 1.0);
  Eigen::MatrixXd gd = generator16(two_spin, rates, 0.0, 0.0);
  TwoSpinGenerator gen;
  gen.k_a = ga.block(1, 1, 15, 15);
  gen.k_b = gb.block(1, 1, 15, 15);
  gen.dissipator = gd.block(1, 1, 15, 15);
  // x1 = 1/2 feeds the first column of the dissipator into a constant source
  gen.source = 0.5 * gd.block(1, 0, 15, 1);
  return gen;
}

double omega_of_ghz(double energy_ghz) {
  return std::numbers::pi * 1e3 * energy_ghz;
}

LinearSystem two_spin_linear_system(const AnnealSchedule& sched,
                                    const IsingProblem& two_spin,
                                    const RateSet& rates,
                                    const TwoSpinOptions& opts) {
  TwoSpinGenerator gen = build_two_spin_generator(two_spin, rates);
  LinearSystem sys;
  sys.dim = 15;
  sys.k_a = gen.k_a;
  sys.k_b = gen.k_b;
  sys.dissipator = gen.dissipator;
  sys.source = gen.source;
  bool zero_a = opts.zero_transverse;
  sys.omega_a = [sched, zero_a](double s) {
    return zero_a ? 0.0 : omega_of_ghz(sched.A(s));
  };
  sys.omega_b = [sched](double s) { return omega_of_ghz(sched.B(s)); };
  Eigen::MatrixXd ka = gen.k_a, kb = gen.k_b;
  auto wa = sys.omega_a, wb = sys.omega_b;
  sys.coherent_of_s = [ka, kb, wa, wb](double s) {
    return Eigen::MatrixXd(wa(s) * ka + wb(s) * kb);
  };
  return sys;
}

RateSet rates_from_equilibrium(const IsingProblem& two_spin, double beta,
                               double base_rate) {
  if (!(base_rate > 0.0)) throw InputError("base rate must be positive");
  if (!(beta >= 0.0)) throw InputError("beta must be >= 0");
  as_two_spin(two_spin);
  Eigen::Vector4d p;
  {
    auto v = gibbs_probs_per_state(two_spin, beta);
    p = Eigen::Vector4d(v[0], v[1], v[2], v[3]);
  }
  if (!(p(0) > 0.0)) {
    throw NumericalError(
        "reference state uu has zero probability; rates undefined");
  }
  RateSet r;
  r.g1 = r.g3 = r.g4 = r.g6 = base_rate;
  double ratio_dd = p(3) / p(0);
  r.g2 = ratio_dd < 1e-10 ? 0.0 : base_rate * ratio_dd;
  r.g5 = base_rate * (p(2) / p(0));
  r.g7 = base_rate * (p(1) / p(0));
  return r;
}

TwoSpinRun run_2spin_protocol(const AnnealSchedule& sched,
                              const IsingProblem& two_spin,
                              const RateSet& rates,
                              const ReverseProtocol& protocol,
                              const StepPlan& plan, const Coeffs16& x0,
                              const std::vector<double>& observers,
                              const TwoSpinOptions& opts) {
  if (std::abs(x0(0) - 0.5) > 1e-12) {
    throw InputError("two-spin state must have unit trace (x1 = 1/2)");
  }
  LinearSystem sys = two_spin_linear_system(sched, two_spin, rates, opts);
  std::vector<double> obs = observers;
  obs.push_back(protocol.t_end_us());
  TwoSpinRun run;
  run.trajectory =
      propagate(sys, plan, protocol, x0.tail<15>(), obs);
  run.t_us = run.trajectory.t_us;
  run.probs.reserve(obs.size());
  for (const auto& tail : run.trajectory.states) {
    Coeffs16 full;
    full(0) = 0.5;
    full.tail<15>() = tail;
    run.probs.push_back(probs_from_coeffs(full));
  }
  return run;
}

}  // namespace ralab
