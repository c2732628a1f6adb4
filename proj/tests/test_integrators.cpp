#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ralab/bloch.hpp"
#include "ralab/lindblad2.hpp"
#include "ralab/problems.hpp"
#include "ralab/schedule.hpp"

using namespace ralab;

namespace {

LinearSystem rotation_about_z(double omega) {
  LinearSystem sys;
  sys.dim = 3;
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  c(0, 1) = omega;
  c(1, 0) = -omega;
  sys.coherent_of_s = [c](double) { return c; };
  sys.dissipator = Eigen::Matrix3d::Zero();
  sys.source = Eigen::Vector3d::Zero();
  return sys;
}

LinearSystem pure_decay(double T) {
  LinearSystem sys;
  sys.dim = 3;
  sys.coherent_of_s = [](double) { return Eigen::Matrix3d::Zero().eval(); };
  sys.dissipator = -Eigen::Matrix3d::Identity() / T;
  sys.source = Eigen::Vector3d::Zero();
  return sys;
}

RateSet preset_rates() {
  RateSet r;
  r.g1 = 1.5;
  r.g3 = 1.5;
  r.g4 = 1.5;
  r.g6 = 1.5;
  r.g5 = 0.6582;
  r.g7 = 0.6582;
  return r;
}

Trajectory run_two(const ReverseProtocol& prot, double tau, StepMethod method,
                   const std::vector<double>& obs) {
  AnnealSchedule sched;
  LinearSystem sys =
      two_spin_linear_system(sched, builtin_problem("2S1"), preset_rates());
  Coeffs16 x0 = coeffs_from_state("uu");
  return propagate(sys, StepPlan{tau, method}, prot, x0.tail<15>(), obs);
}

Trajectory run_bloch_traj(const BlochParams& bp, const ReverseProtocol& prot,
                          double tau, StepMethod method,
                          const std::vector<double>& obs) {
  AnnealSchedule sched;
  LinearSystem sys = bloch_system(sched, 0.1, bp);
  return propagate(sys, StepPlan{tau, method}, prot,
                   Eigen::Vector3d(0.0, 0.0, -1.0), obs);
}

double final_ratio(const Trajectory& a, const Trajectory& b,
                   const Trajectory& c) {
  return (a.states.back() - b.states.back()).norm() /
         (b.states.back() - c.states.back()).norm();
}

Eigen::Vector4d probs_of(const Eigen::VectorXd& tail15) {
  Coeffs16 full;
  full(0) = 0.5;
  full.tail<15>() = tail15;
  return probs_from_coeffs(full);
}

}  // namespace

TEST_CASE("single step reproduces a closed-form rotation") {
  double omega = 3.0, tau = 0.25;
  LinearSystem sys = rotation_about_z(omega);
  Eigen::Vector3d x(1.0, 0.0, 0.0);
  Eigen::Vector3d want(std::cos(omega * tau), -std::sin(omega * tau), 0.0);
  CHECK((step_diag(sys, x, 0.5, tau) - want).norm() < 1e-12);
  CHECK((step_product_bloch(sys, x, 0.5, tau) - want).norm() < 1e-12);
}

TEST_CASE("single step reproduces componentwise decay") {
  LinearSystem sys = pure_decay(2.0);
  Eigen::Vector3d x(0.3, -1.0, 0.8);
  Eigen::VectorXd got = step_diag(sys, x, 0.5, 0.5);
  CHECK((got - x * std::exp(-0.25)).norm() < 1e-12);
}

TEST_CASE("damping toward a fixed point holds it") {
  double T1 = 10.0, M0 = -0.66;
  LinearSystem sys = pure_decay(T1);
  sys.source = Eigen::Vector3d(0.0, 0.0, M0 / T1);
  Eigen::Vector3d x(0.0, 0.0, M0);
  // the spectral step solves the affine flow exactly; the split step drifts
  // off the fixed point only at second order in the step size
  CHECK((step_diag(sys, x, 0.5, 1.0) - x).norm() < 1e-12);
  double drift_big = (step_product_bloch(sys, x, 0.5, 1.0) - x).norm();
  double drift_small = (step_product_bloch(sys, x, 0.5, 0.1) - x).norm();
  CHECK(drift_big < 1e-4);
  CHECK(drift_small < 3e-6);
  CHECK(drift_big / drift_small > 20.0);
}

TEST_CASE("zero field and infinite relaxation leave the state untouched") {
  AnnealSchedule sched;
  LinearSystem sys = bloch_system(sched, 0.0, BlochParams{});
  Eigen::Vector3d x(0.3, 0.4, -0.2);
  // A(1) = 0 and h1 = 0: every exponent vanishes
  CHECK((step_product_bloch(sys, x, 1.0, 0.1) - x).norm() < 1e-15);
}

TEST_CASE("spectral propagator handles the singular source limit") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd y(1);
  y << 2.0;
  AffinePropagator prop = diag_propagator(m, y, 0.5);
  CHECK(prop.phi(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(prop.psi(0) == doctest::Approx(1.0).epsilon(1e-12));  // tau * y

  m(0, 0) = -1e-12;  // below the series threshold
  prop = diag_propagator(m, y, 0.5);
  CHECK(prop.psi(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("defective generator raises the fallback signal") {
  LinearSystem sys;
  sys.dim = 2;
  sys.coherent_of_s = [](double) { return Eigen::Matrix2d::Zero().eval(); };
  sys.dissipator = Eigen::Matrix2d::Zero();
  sys.dissipator(0, 1) = 1.0;  // Jordan block, eigenvectors collapse
  sys.source = Eigen::Vector2d::Zero();
  Eigen::Vector2d x(1.0, 1.0);
  try {
    step_diag(sys, x, 0.5, 0.1);
    FAIL("expected IllConditionedError");
  } catch (const IllConditionedError& e) {
    CHECK(e.condition_number > 1e12);
  }
}

TEST_CASE("step halving converges at second order") {
  // damped single spin, both steppers, ramp-containing protocol
  BlochParams bp{41.67, 41.67, -0.66};
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  for (auto m : {StepMethod::diagonalization, StepMethod::product_formula}) {
    double t0 = 2e-4;
    auto a = run_bloch_traj(bp, wts, t0, m, {4.0});
    auto b = run_bloch_traj(bp, wts, t0 / 2, m, {4.0});
    auto c = run_bloch_traj(bp, wts, t0 / 4, m, {4.0});
    double r = final_ratio(a, b, c);
    CHECK(r > 3.5);
    CHECK(r < 4.5);
  }
}

TEST_CASE("two-spin step halving converges at second order") {
  // the spectral stepper needs ramps (it is exact on constant segments)
  {
    ReverseProtocol ats = ats_protocol(0.7, 2.0);
    double t0 = 4e-5;
    auto a = run_two(ats, t0, StepMethod::diagonalization, {2.0});
    auto b = run_two(ats, t0 / 2, StepMethod::diagonalization, {2.0});
    auto c = run_two(ats, t0 / 4, StepMethod::diagonalization, {2.0});
    double r = final_ratio(a, b, c);
    CHECK(r > 3.5);
    CHECK(r < 4.5);
  }
  // the split stepper is cleanest on a constant generator, where its own
  // splitting error is the one being measured
  {
    ReverseProtocol hold{0.7, 0.0, 1.0, 0.0};
    double t0 = 1e-5;
    auto a = run_two(hold, t0, StepMethod::product_formula, {1.0});
    auto b = run_two(hold, t0 / 2, StepMethod::product_formula, {1.0});
    auto c = run_two(hold, t0 / 4, StepMethod::product_formula, {1.0});
    double r = final_ratio(a, b, c);
    CHECK(r > 3.5);
    CHECK(r < 4.5);
  }
}

TEST_CASE("stepper pair agrees on the single-spin system") {
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  std::vector<double> obs;
  for (int i = 0; i <= 40; ++i) obs.push_back(0.1 * i);
  for (auto bp : {BlochParams{41.67, 41.67, -0.66}, BlochParams{30, 20, -0.5}}) {
    for (double tau : {1e-3, 1e-4}) {
      auto d = run_bloch_traj(bp, wts, tau, StepMethod::diagonalization, obs);
      auto p = run_bloch_traj(bp, wts, tau, StepMethod::product_formula, obs);
      CHECK(sup_norm_diff(d, p) < 10.0 * tau * tau);
    }
  }
}

TEST_CASE("stepper pair difference on the two-spin system scales at second order") {
  // The raw-coefficient gap carries a large constant from the longitudinal
  // precession scale (measured ~9e3 * tau^2); the populations agree within
  // 10 * tau^2 once tau resolves the fastest phase.
  ReverseProtocol ats = ats_protocol(0.7, 2.0);
  std::vector<double> obs;
  for (int i = 0; i <= 20; ++i) obs.push_back(0.1 * i);
  double tau_hi = 2e-5, tau_lo = 1e-5;
  auto d_hi = run_two(ats, tau_hi, StepMethod::diagonalization, obs);
  auto p_hi = run_two(ats, tau_hi, StepMethod::product_formula, obs);
  auto d_lo = run_two(ats, tau_lo, StepMethod::diagonalization, obs);
  auto p_lo = run_two(ats, tau_lo, StepMethod::product_formula, obs);

  double sup_hi = sup_norm_diff(d_hi, p_hi);
  double sup_lo = sup_norm_diff(d_lo, p_lo);
  CHECK(sup_hi < 2e4 * tau_hi * tau_hi);
  CHECK(sup_lo < 2e4 * tau_lo * tau_lo);
  CHECK(sup_hi / sup_lo > 3.0);
  CHECK(sup_hi / sup_lo < 5.5);

  double pop_hi = 0.0, pop_lo = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    pop_hi = std::max(pop_hi, (probs_of(d_hi.states[i]) - probs_of(p_hi.states[i]))
                                  .cwiseAbs()
                                  .maxCoeff());
    pop_lo = std::max(pop_lo, (probs_of(d_lo.states[i]) - probs_of(p_lo.states[i]))
                                  .cwiseAbs()
                                  .maxCoeff());
  }
  CHECK(pop_hi < 10.0 * tau_hi * tau_hi);
  CHECK(pop_lo < 10.0 * tau_lo * tau_lo);
}

TEST_CASE("single-spin stepper difference shrinks fourfold under halving") {
  BlochParams bp{41.67, 41.67, -0.66};
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  std::vector<double> obs;
  for (int i = 0; i <= 40; ++i) obs.push_back(0.1 * i);
  auto diff_at = [&](double tau) {
    auto d = run_bloch_traj(bp, wts, tau, StepMethod::diagonalization, obs);
    auto p = run_bloch_traj(bp, wts, tau, StepMethod::product_formula, obs);
    return sup_norm_diff(d, p);
  };
  double r = diff_at(1e-3) / diff_at(5e-4);
  CHECK(r > 3.0);
  CHECK(r < 5.5);
}

TEST_CASE("norm contraction of the damped single spin") {
  AnnealSchedule sched;
  ReverseProtocol wts = wts_protocol(0.7, 6.0);
  std::vector<double> obs;
  for (int i = 0; i <= 60; ++i) obs.push_back(0.1 * i);
  for (auto bp : {BlochParams{41.67, 41.67, -0.66}, BlochParams{30, 20, -0.5},
                  BlochParams{25, 25, 0.0}}) {
    LinearSystem sys = bloch_system(sched, 0.1, bp);
    for (double scale : {1.0, 1.5}) {
      Eigen::Vector3d x0 = scale * Eigen::Vector3d(0.6, 0.0, 0.8).normalized();
      Trajectory tr = propagate(sys, StepPlan{}, wts, x0, obs);
      double bound = std::max(x0.norm(), 1.0) + 1e-9;
      for (const auto& s : tr.states) CHECK(s.norm() <= bound);
    }
  }
}

TEST_CASE("hold segment matches the one-shot exponential") {
  // constant generator: N small steps against a single closed-form propagator
  ReverseProtocol hold{0.7, 0.0, 0.5, 0.0};
  AnnealSchedule sched;

  LinearSystem two =
      two_spin_linear_system(sched, builtin_problem("2S1"), preset_rates());
  Coeffs16 x0 = coeffs_from_state("uu");
  Trajectory tr = propagate(two, StepPlan{}, hold, x0.tail<15>(), {0.5});
  Eigen::MatrixXd m = two.coherent_of_s(0.7) + two.dissipator;
  AffinePropagator one = diag_propagator(m, two.source, 0.5);
  Eigen::VectorXd want = one.phi * x0.tail<15>() + one.psi;
  CHECK((tr.states.back() - want).cwiseAbs().maxCoeff() < 1e-8);

  BlochParams bp{41.67, 41.67, -0.66};
  LinearSystem bl = bloch_system(sched, 0.1, bp);
  Eigen::Vector3d b0(0.0, 0.0, -1.0);
  Trajectory tb = propagate(bl, StepPlan{}, hold, b0, {0.5});
  AffinePropagator oneb =
      diag_propagator(bl.coherent_of_s(0.7) + bl.dissipator, bl.source, 0.5);
  CHECK((tb.states.back() - (oneb.phi * b0 + oneb.psi)).cwiseAbs().maxCoeff() <
        1e-8);
}

TEST_CASE("degenerate and wait-only protocols") {
  AnnealSchedule sched;
  LinearSystem sys = bloch_system(sched, 0.1, BlochParams{41.67, 41.67, -0.66});
  Eigen::Vector3d x0(0.1, 0.2, 0.3);
  // a protocol with no extent at all is rejected up front
  CHECK_THROWS_AS(
      propagate(sys, StepPlan{}, ReverseProtocol{0.7, 0.0, 0.0, 0.0}, x0, {}),
      InputError);
  // a pure hold is legal and the t = 0 observer echoes the start exactly
  ReverseProtocol hold{0.7, 0.0, 0.5, 0.0};
  Trajectory tr = propagate(sys, StepPlan{}, hold, x0, {0.0, 0.5});
  REQUIRE(tr.states.size() == 2);
  CHECK((tr.states[0] - x0).norm() == 0.0);
}

TEST_CASE("self-convergence at the default step size") {
  BlochParams bp{41.67, 41.67, -0.66};
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  for (auto m : {StepMethod::diagonalization, StepMethod::product_formula}) {
    auto a = run_bloch_traj(bp, wts, 1e-3, m, {4.0});
    auto b = run_bloch_traj(bp, wts, 5e-4, m, {4.0});
    // both methods share the same leading error from sampling s(t) once per
    // step, about 8.3e-6 here
    CHECK((a.states.back() - b.states.back()).norm() < 2e-5);
  }
  ReverseProtocol ats = ats_protocol(0.7, 2.0);
  auto a = run_two(ats, 1e-3, StepMethod::diagonalization, {2.0});
  auto b = run_two(ats, 5e-4, StepMethod::diagonalization, {2.0});
  CHECK((a.states.back() - b.states.back()).norm() < 1e-6);
}

TEST_CASE("split two-spin step is first-order consistent") {
  AnnealSchedule sched;
  LinearSystem sys =
      two_spin_linear_system(sched, builtin_problem("2S1"), preset_rates());
  Coeffs16 full = coeffs_from_state("uu");
  Eigen::VectorXd x = full.tail<15>();
  double s = 0.8;
  Eigen::VectorXd rhs = (sys.coherent_of_s(s) + sys.dissipator) * x + sys.source;
  auto defect = [&](double tau) {
    Eigen::VectorXd lhs = (step_product_twospin(sys, x, s, tau) - x) / tau;
    return (lhs - rhs).cwiseAbs().maxCoeff();
  };
  // the splitting defect is small against generator entries of order 4e4 and
  // shrinks linearly with the step
  double d1 = defect(1e-6);
  double d2 = defect(1e-7);
  CHECK(d1 < 1e-2);
  CHECK(d2 / d1 > 0.05);
  CHECK(d2 / d1 < 0.2);
}

TEST_CASE("observer times snap to step boundaries") {
  BlochParams bp{41.67, 41.67, -0.66};
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  auto tr = run_bloch_traj(bp, wts, 1e-3, StepMethod::diagonalization,
                           {0.0004, 0.0006, 2.0, 4.0});
  REQUIRE(tr.t_us.size() == 4);
  CHECK(tr.t_us[0] == doctest::Approx(0.0));
  CHECK(tr.t_us[1] == doctest::Approx(0.001));
  CHECK(tr.t_us[2] == doctest::Approx(2.0));
  CHECK(tr.t_us[3] == doctest::Approx(4.0));
  CHECK(tr.steps == 4000);
  CHECK(tr.tau_us == doctest::Approx(1e-3));
  CHECK_THROWS_AS(run_bloch_traj(bp, wts, 1e-3, StepMethod::diagonalization,
                                 {4.5}),
                  InputError);
}

TEST_CASE("trajectory comparison requires shared observers") {
  BlochParams bp{41.67, 41.67, -0.66};
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  auto a = run_bloch_traj(bp, wts, 1e-3, StepMethod::diagonalization, {1.0, 2.0});
  auto b = run_bloch_traj(bp, wts, 1e-3, StepMethod::diagonalization, {1.0});
  CHECK_THROWS_AS(sup_norm_diff(a, b), InputError);
}
