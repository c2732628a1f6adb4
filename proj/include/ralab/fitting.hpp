#pragma once

#include <string>
#include <vector>

#include "ralab/errors.hpp"

namespace ralab {

// Saturation curve p(t) = f1 * (1 - f2 * exp(-f3 * t)).
struct SaturatingExpFit {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  // false when the data carry no curvature (constant data or f2 ~ 0), in
  // which case f3 is arbitrary and reported as 0.
  bool f3_identifiable = true;
};

// Nonlinear fit did not converge; carries the last iterate.
struct FitError : NumericalError {
  FitError(const std::string& what, SaturatingExpFit last_in)
      : NumericalError(what), last(last_in) {}
  SaturatingExpFit last;
};

// Damped Gauss-Newton from the standard initialization (f1 = max p,
// f2 = 1 - p_first/f1, f3 = 1/median t); converges when the relative
// parameter change drops below tol.
SaturatingExpFit fit_saturating_exp(const std::vector<double>& t,
                                    const std::vector<double>& p,
                                    int max_iterations = 200,
                                    double tol = 1e-9);

struct ScalingFit {
  double a = 0.0;  // prefactor
  double b = 0.0;  // decay constant or exponent
  double rms_log_residual = 0.0;
  int points_used = 0;
  int points_excluded = 0;
};

// y = a * exp(-b * x) by linear least squares on log y; points with
// x <= x_min are excluded (and counted), mirroring the gap-range restriction
// of the scaling analysis.
ScalingFit fit_exp_decay(const std::vector<double>& x,
                         const std::vector<double>& y, double x_min = 1.0);

// y = a * x^b by linear least squares in log-log space.
ScalingFit fit_power_law(const std::vector<double>& x,
                         const std::vector<double>& y);

// Direct nonlinear variants (damped Gauss-Newton on the untransformed
// residuals), for sensitivity cross-checks against the log-space fits.
ScalingFit fit_exp_decay_nonlinear(const std::vector<double>& x,
                                   const std::vector<double>& y,
                                   double x_min = 1.0);
ScalingFit fit_power_law_nonlinear(const std::vector<double>& x,
                                   const std::vector<double>& y);

}  // namespace ralab
