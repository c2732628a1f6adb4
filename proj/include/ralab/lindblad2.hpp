#pragma once

#include <string>
#include <vector>

#include "ralab/integrators.hpp"
#include "ralab/problems.hpp"
#include "ralab/schedule.hpp"

namespace ralab {

// Rates (per us) for the seven jump operators of the two-spin dissipator:
// g1 dd->uu, g2 uu->dd, g3 collective dephasing (diag(1,-1,-1,1)),
// g4 du->uu, g5 uu->du, g6 ud->uu, g7 uu->ud.
struct RateSet {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double g4 = 0.0;
  double g5 = 0.0;
  double g6 = 0.0;
  double g7 = 0.0;

  void validate() const;  // all nonnegative
};

RateSet scaled(const RateSet& r, double factor);

// JSON object {"g1":..., ..., "g7":..., "unit":"per_us"|"Hz"}; Hz values are
// converted to per-us (x 1e-6). Unit defaults to per_us.
RateSet load_rates_json(const std::string& path);
void save_rates_json(const std::string& path, const RateSet& r);

// Real coefficients of rho in the orthonormal product basis
// e_k = (P_a kron P_b)/2 with P in {I, X, Y, Z}, row-major k = 4a + b
// (0-based). x[0] = 1/2 encodes unit trace.
using Coeffs16 = Eigen::Matrix<double, 16, 1>;

Coeffs16 coeffs_from_state(const std::string& label);  // "uu".."dd"
Coeffs16 coeffs_from_probs(const Eigen::Vector4d& probs);
// Diagonal of the reconstructed rho in order (uu, ud, du, dd); the last
// entry closes the simplex so the four values sum to one exactly.
Eigen::Vector4d probs_from_coeffs(const Coeffs16& x);
Eigen::Matrix4cd density_from_coeffs(const Coeffs16& x);
Coeffs16 coeffs_from_density(const Eigen::Matrix4cd& rho);

// Full 16x16 generator G_{kl} = Tr[e_k L(e_l)] at fixed angular frequencies
// (rad/us) for the transverse and longitudinal Hamiltonian parts. Row 0
// vanishes (trace preservation).
Eigen::MatrixXd generator16(const IsingProblem& two_spin, const RateSet& rates,
                            double omega_a, double omega_b);

// Constant pieces of the affine 15-dim system on (x_2..x_16):
// C(s) = omega_a(s) K_A + omega_b(s) K_B, plus dissipator D and source y
// contributed by x_1 = 1/2.
struct TwoSpinGenerator {
  Eigen::MatrixXd k_a;
  Eigen::MatrixXd k_b;
  Eigen::MatrixXd dissipator;
  Eigen::VectorXd source;
};

TwoSpinGenerator build_two_spin_generator(const IsingProblem& two_spin,
                                          const RateSet& rates);

// Schedule energies map to angular frequencies via pi * 1e3 (GHz -> rad/us
// for the conventional 1/2 prefactor of the spin operators).
double omega_of_ghz(double energy_ghz);

struct TwoSpinOptions {
  bool zero_transverse = false;  // drop the transverse part entirely
};

LinearSystem two_spin_linear_system(const AnnealSchedule& sched,
                                    const IsingProblem& two_spin,
                                    const RateSet& rates,
                                    const TwoSpinOptions& opts = {});

// Detailed-balance rates targeting the Gibbs state of the problem:
// g1 = g3 = g4 = g6 = base_rate, g2 = base*p_dd/p_uu (clamped to 0 for
// vanishing ratio), g5 = base*p_du/p_uu, g7 = base*p_ud/p_uu.
RateSet rates_from_equilibrium(const IsingProblem& two_spin, double beta,
                               double base_rate);

struct TwoSpinRun {
  std::vector<double> t_us;
  std::vector<Eigen::Vector4d> probs;  // (uu, ud, du, dd) per observer
  Trajectory trajectory;               // raw 15-dim coefficients
};

TwoSpinRun run_2spin_protocol(const AnnealSchedule& sched,
                              const IsingProblem& two_spin,
                              const RateSet& rates,
                              const ReverseProtocol& protocol,
                              const StepPlan& plan, const Coeffs16& x0,
                              const std::vector<double>& observers = {},
                              const TwoSpinOptions& opts = {});

}  // namespace ralab
