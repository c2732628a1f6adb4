#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ralab/bloch.hpp"
#include "ralab/schedule.hpp"

using namespace ralab;

namespace {

using Mat2 = Eigen::Matrix2cd;
const std::complex<double> kI{0.0, 1.0};

Mat2 sigma_x() { return (Mat2() << 0, 1, 1, 0).finished(); }
Mat2 sigma_y() { return (Mat2() << 0, -kI, kI, 0).finished(); }
Mat2 sigma_z() { return (Mat2() << 1, 0, 0, -1).finished(); }

// Independent reference: RK4 on the 2x2 density matrix with H = -B.sigma/2
// and raising/lowering/dephasing dissipators, basis |up>, |down>.
Eigen::Vector3d rk4_density_reference(const Eigen::Vector3d& field,
                                      const BlochRates& r,
                                      const Eigen::Vector3d& s0, double t_total,
                                      double dt) {
  Mat2 rho = 0.5 * (Mat2::Identity() + s0.x() * sigma_x() +
                    s0.y() * sigma_y() + s0.z() * sigma_z());
  Mat2 h = -0.5 * (field.x() * sigma_x() + field.y() * sigma_y() +
                   field.z() * sigma_z());
  Mat2 up = (Mat2() << 0, 1, 0, 0).finished();    // down -> up
  Mat2 down = (Mat2() << 0, 0, 1, 0).finished();  // up -> down
  struct Channel { Mat2 l; double g; };
  std::vector<Channel> chans = {{up, r.g1}, {down, r.g2}, {sigma_z(), r.g3}};
  auto rhs = [&](const Mat2& x) {
    Mat2 d = -kI * (h * x - x * h);
    for (const auto& c : chans) {
      Mat2 ldag = c.l.adjoint();
      d += c.g * (c.l * x * ldag - 0.5 * (ldag * c.l * x + x * ldag * c.l));
    }
    return d;
  };
  long steps = std::lround(t_total / dt);
  for (long i = 0; i < steps; ++i) {
    Mat2 k1 = rhs(rho);
    Mat2 k2 = rhs(rho + 0.5 * dt * k1);
    Mat2 k3 = rhs(rho + 0.5 * dt * k2);
    Mat2 k4 = rhs(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return Eigen::Vector3d((rho * sigma_x()).trace().real(),
                         (rho * sigma_y()).trace().real(),
                         (rho * sigma_z()).trace().real());
}

}  // namespace

TEST_CASE("rate triple maps to relaxation times") {
  BlochParams p = rates_to_bloch({0.00408, 0.01992, 0.006});
  CHECK(p.T1_us == doctest::Approx(41.6667).epsilon(1e-4));
  CHECK(p.T2_us == doctest::Approx(41.6667).epsilon(1e-4));
  CHECK(p.M0 == doctest::Approx(-0.66).epsilon(1e-12));

  BlochParams zero = rates_to_bloch({0.0, 0.0, 0.0});
  CHECK(std::isinf(zero.T1_us));
  CHECK(std::isinf(zero.T2_us));
  CHECK(zero.M0 == 0.0);
}

TEST_CASE("relaxation times map back to rates") {
  BlochParams p{41.67, 41.67, -0.66};
  BlochRates r = bloch_to_rates(p);
  BlochParams back = rates_to_bloch(r);
  CHECK(back.T1_us == doctest::Approx(p.T1_us).epsilon(1e-10));
  CHECK(back.T2_us == doctest::Approx(p.T2_us).epsilon(1e-10));
  CHECK(back.M0 == doctest::Approx(p.M0).epsilon(1e-10));
  CHECK(r.g1 >= 0.0);
  CHECK(r.g2 >= 0.0);
  CHECK(r.g3 >= 0.0);

  // transverse never outlives twice the longitudinal limit
  CHECK_THROWS_AS((bloch_to_rates(BlochParams{10.0, 25.0, 0.0})), InputError);
  // boundary case T2 = 2 T1 leaves no dephasing
  BlochRates edge = bloch_to_rates(BlochParams{10.0, 20.0, 0.0});
  CHECK(edge.g3 == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((BlochParams{-1.0, 1.0, 0.0}.validate()), InputError);
  CHECK_THROWS_AS((BlochParams{10.0, -1.0, 0.0}.validate()), InputError);
  CHECK_THROWS_AS((BlochParams{10.0, 10.0, 1.5}.validate()), InputError);
  CHECK_NOTHROW((BlochParams{10.0, 10.0, -0.66}.validate()));
  CHECK_NOTHROW((BlochParams{}.validate()));  // free spin
}

TEST_CASE("effective field components") {
  AnnealSchedule sched;
  Eigen::Vector3d f1 = field_of_s(sched, 1.0, 0.1);
  CHECK(f1.x() == 0.0);  // A(1) = 0
  CHECK(f1.y() == 0.0);
  CHECK(f1.z() ==
        doctest::Approx(-2.0 * M_PI * 8.5848 * 0.1 * 1e3).epsilon(1e-12));

  Eigen::Vector3d f0 = field_of_s(sched, 0.7, 0.0);
  CHECK(f0.x() ==
        doctest::Approx(2.0 * M_PI * sched.A(0.7) * 1e3).epsilon(1e-12));
  CHECK(f0.z() == 0.0);  // unbiased spin feels no longitudinal field
}

TEST_CASE("system assembly matches the equation of motion") {
  AnnealSchedule sched;
  BlochParams bp{41.67, 41.67, -0.66};
  LinearSystem sys = bloch_system(sched, 0.1, bp);
  REQUIRE(sys.dim == 3);
  CHECK_NOTHROW(sys.check(0.7));

  Eigen::Vector3d x(0.3, -0.5, 0.7);
  Eigen::Vector3d b = field_of_s(sched, 0.7, 0.1);
  Eigen::Vector3d want =
      x.cross(b) - Eigen::Vector3d(x.x() / bp.T2_us, x.y() / bp.T2_us,
                                   (x.z() - bp.M0) / bp.T1_us);
  Eigen::Vector3d got =
      (sys.coherent_of_s(0.7) + sys.dissipator) * x + sys.source;
  CHECK((got - want).norm() < 1e-12);
}

TEST_CASE("state labels and probabilities") {
  CHECK(bloch_from_label('u') == Eigen::Vector3d(0, 0, 1));
  CHECK(bloch_from_label('d') == Eigen::Vector3d(0, 0, -1));
  CHECK_THROWS_AS(bloch_from_label('x'), InputError);

  ProbPoint p = probs_from_bloch(Eigen::Vector3d(0.3, 0.1, 0.5), 7.0);
  CHECK(p.t_us == 7.0);
  CHECK(p.p_up == doctest::Approx(0.75));
  CHECK(p.p_down == doctest::Approx(0.25));
  CHECK(p.p_up + p.p_down == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hold dynamics match an independent density-matrix integration") {
  AnnealSchedule sched;
  // strong damping so the dissipators matter on a 0.1 us hold
  BlochRates rates{2.0, 5.0, 1.0};
  BlochParams bp = rates_to_bloch(rates);
  double h1 = 0.01;
  ReverseProtocol hold{0.7, 0.0, 0.1, 0.0};
  BlochRun run = run_1spin_protocol(sched, h1, bp, hold,
                                    StepPlan{1e-3, StepMethod::diagonalization},
                                    'd', {0.1});
  Eigen::Vector3d got = run.trajectory.states.back();

  Eigen::Vector3d field = field_of_s(sched, 0.7, h1);
  Eigen::Vector3d ref = rk4_density_reference(
      field, rates, Eigen::Vector3d(0, 0, -1), 0.1, 5e-6);
  CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("protocol run bookkeeping") {
  AnnealSchedule sched;
  BlochParams bp{41.67, 41.67, -0.66};
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  BlochRun run = run_1spin_protocol(sched, 0.1, bp, wts, StepPlan{}, 'd',
                                    {0.0, 1.0, 2.0});
  // requested observers plus the automatic end-of-protocol record
  REQUIRE(run.points.size() == 4);
  CHECK(run.points[0].t_us == doctest::Approx(0.0));
  CHECK(run.points[0].p_down == doctest::Approx(1.0));
  CHECK(run.points.back().t_us == doctest::Approx(4.0));
  for (const auto& p : run.points) {
    CHECK(p.p_up + p.p_down == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.p_up >= -1e-12);
    CHECK(p.p_down >= -1e-12);
  }
  CHECK_THROWS_AS(
      run_1spin_protocol(sched, 0.1, bp, wts, StepPlan{}, 'q', {}),
      InputError);
}

TEST_CASE("long hold relaxes toward the magnetization fixed point") {
  AnnealSchedule sched;
  BlochParams bp{41.67, 41.67, -0.66};
  ReverseProtocol wts = wts_protocol(0.7, 400.0);
  BlochRun run = run_1spin_protocol(sched, 0.1, bp, wts, StepPlan{}, 'd', {});
  // p_down saturates at (1 - M0)/2 = 0.83
  CHECK(run.points.back().p_down == doctest::Approx(0.83).epsilon(2e-3));
}

TEST_CASE("degenerate spin oscillates with the hold duration") {
  AnnealSchedule sched;
  BlochParams bp{25.0, 25.0, 0.0};
  StepPlan plan;
  // half an oscillation period apart at the transverse frequency of the
  // reversal point: p_up swings by a large fraction
  BlochRun a = run_1spin_protocol(sched, 0.0, bp, wts_protocol(0.7, 4.0), plan,
                                  'u', {});
  BlochRun b = run_1spin_protocol(sched, 0.0, bp, wts_protocol(0.7, 5.4), plan,
                                  'u', {});
  CHECK(std::abs(a.points.back().p_up - b.points.back().p_up) > 0.1);
}
