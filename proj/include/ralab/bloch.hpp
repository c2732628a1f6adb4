#pragma once

#include <limits>
#include <vector>

#include "ralab/integrators.hpp"
#include "ralab/schedule.hpp"

namespace ralab {

// Single-spin relaxation parameters; infinite times mean no damping on that
// channel.
struct BlochParams {
  double T1_us = std::numeric_limits<double>::infinity();
  double T2_us = std::numeric_limits<double>::infinity();
  double M0 = 0.0;

  void validate() const;  // T2 <= 2 T1, positive times, |M0| <= 1
};

struct BlochRates {
  double g1 = 0.0;  // down -> up
  double g2 = 0.0;  // up -> down
  double g3 = 0.0;  // dephasing
};

// T2 = 2/(g1+g2+4 g3), T1 = 1/(g1+g2), M0 = (g1-g2)/(g1+g2);
// all-zero rates give infinite times and M0 = 0.
BlochParams rates_to_bloch(const BlochRates& r);
// Inverse map; requires T2 <= 2 T1 so the dephasing rate is nonnegative.
BlochRates bloch_to_rates(const BlochParams& p);

// Effective field in rad/us: (2*pi*A(s)*1e3, 0, -2*pi*B(s)*h1*1e3).
Eigen::Vector3d field_of_s(const AnnealSchedule& sched, double s, double h1);

// dS/dt = S x B(s) + damping toward (0, 0, M0).
LinearSystem bloch_system(const AnnealSchedule& sched, double h1,
                          const BlochParams& params);

struct ProbPoint {
  double t_us = 0.0;
  double p_up = 0.0;
  double p_down = 0.0;
};

Eigen::Vector3d bloch_from_label(char state);  // 'u' -> (0,0,1), 'd' -> -z
ProbPoint probs_from_bloch(const Eigen::Vector3d& s, double t_us = 0.0);

struct BlochRun {
  std::vector<ProbPoint> points;  // observers plus a final entry at t_end
  Trajectory trajectory;
};

BlochRun run_1spin_protocol(const AnnealSchedule& sched, double h1,
                            const BlochParams& params,
                            const ReverseProtocol& protocol,
                            const StepPlan& plan, char initial_state,
                            const std::vector<double>& observers = {});

}  // namespace ralab
