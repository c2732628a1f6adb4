#include "ralab/bloch.hpp"

#include <cmath>
#include <numbers>

namespace ralab {
namespace {

constexpr double kGhzToRad = 2.0 * std::numbers::pi * 1e3;  // GHz -> rad/us

double inv_or_zero(double t) { return std::isinf(t) ? 0.0 : 1.0 / t; }

}  // namespace

void BlochParams::validate() const {
  if (!(T1_us > 0.0) || !(T2_us > 0.0)) {
    throw InputError("relaxation times must be positive");
  }
  if (T2_us > 2.0 * T1_us * (1.0 + 1e-12)) {
    throw InputError("T2 must not exceed 2*T1");
  }
  if (!(std::abs(M0) <= 1.0)) {
    throw InputError("equilibrium magnetization must lie in [-1, 1]");
  }
}

BlochParams rates_to_bloch(const BlochRates& r) {
  if (r.g1 < 0.0 || r.g2 < 0.0 || r.g3 < 0.0) {
    throw InputError("rates must be nonnegative");
  }
  BlochParams p;
  double flip = r.g1 + r.g2;
  double deph = flip + 4.0 * r.g3;
  p.T1_us = flip > 0.0 ? 1.0 / flip
                       : std::numeric_limits<double>::infinity();
  p.T2_us = deph > 0.0 ? 2.0 / deph
                       : std::numeric_limits<double>::infinity();
  p.M0 = flip > 0.0 ? (r.g1 - r.g2) / flip : 0.0;
  return p;
}

BlochRates bloch_to_rates(const BlochParams& p) {
  p.validate();
  double flip = inv_or_zero(p.T1_us);
  double half_diff = p.M0 * flip;  // g1 - g2
  BlochRates r;
  r.g1 = 0.5 * (flip + half_diff);
  r.g2 = 0.5 * (flip - half_diff);
  r.g3 = 0.25 * (2.0 * inv_or_zero(p.T2_us) - flip);
  if (r.g3 < 0.0 && r.g3 > -1e-15) r.g3 = 0.0;
  if (r.g1 < 0.0 || r.g2 < 0.0 || r.g3 < 0.0) {
    throw InputError("parameters map to a negative rate");
  }
  return r;
}

Eigen::Vector3d field_of_s(const AnnealSchedule& sched, double s, double h1) {
  return {kGhzToRad * sched.A(s), 0.0, -kGhzToRad * sched.B(s) * h1};
}

LinearSystem bloch_system(const AnnealSchedule& sched, double h1,
                          const BlochParams& params) {
  params.validate();
  LinearSystem sys;
  sys.dim = 3;
  sys.coherent_of_s = [sched, h1](double s) {
    Eigen::Vector3d b = field_of_s(sched, s, h1);
    Eigen::MatrixXd c(3, 3);
    // dS/dt = S x B
    c << 0, b.z(), -b.y(), -b.z(), 0, b.x(), b.y(), -b.x(), 0;
    return c;
  };
  double r2 = inv_or_zero(params.T2_us), r1 = inv_or_zero(params.T1_us);
  sys.dissipator = Eigen::Vector3d(-r2, -r2, -r1).asDiagonal();
  sys.source = Eigen::Vector3d(0.0, 0.0, params.M0 * r1);
  return sys;
}

Eigen::Vector3d bloch_from_label(char state) {
  if (state == 'u' || state == 'U') return {0.0, 0.0, 1.0};
  if (state == 'd' || state == 'D') return {0.0, 0.0, -1.0};
  throw InputError(std::string("unknown spin state '") + state +
                   "'; expected 'u' or 'd'");
}

ProbPoint probs_from_bloch(const Eigen::Vector3d& s, double t_us) {
  ProbPoint p;
  p.t_us = t_us;
  p.p_up = 0.5 * (1.0 + s.z());
  p.p_down = 0.5 * (1.0 - s.z());
  return p;
}

BlochRun run_1spin_protocol(const AnnealSchedule& sched, double h1,
                            const BlochParams& params,
                            const ReverseProtocol& protocol,
                            const StepPlan& plan, char initial_state,
                            const std::vector<double>& observers) {
  LinearSystem sys = bloch_system(sched, h1, params);
  std::vector<double> obs = observers;
  obs.push_back(protocol.t_end_us());
  BlochRun run;
  run.trajectory = propagate(sys, plan, protocol,
                             bloch_from_label(initial_state), obs);
  run.points.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    run.points.push_back(probs_from_bloch(run.trajectory.states[i],
                                          run.trajectory.t_us[i]));
  }
  return run;
}

}  // namespace ralab
