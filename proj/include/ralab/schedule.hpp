#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ralab/errors.hpp"

namespace ralab {

// Annealer energy scales in GHz (values of A(s)/h and B(s)/h), captured by
// the closed forms
//   A(s) = (1 - s) * exp(A_a + A_b*s + A_c*s^2 + A_d*s^3)
//   B(s) = B_a + B_b*s + B_c*s^2
// on the normalized anneal fraction s in [0, 1].
struct ScheduleCoeffs {
  double A_a = 1.7918;
  double A_b = -7.0;
  double A_c = -3.0;
  double A_d = -1.0;
  double B_a = 0.60;
  double B_b = 3.8152;
  double B_c = 4.1696;
};

struct ScheduleFitReport {
  double max_rel_residual_A = 0.0;
  double max_rel_residual_B = 0.0;
  int rows_used_A = 0;
  int rows_used_B = 0;
};

class AnnealSchedule {
 public:
  AnnealSchedule() { validate(); }
  explicit AnnealSchedule(const ScheduleCoeffs& c) : c_(c) { validate(); }

  // Transverse scale A(s)/h in GHz; s must lie in [0, 1].
  double A(double s) const;
  // Longitudinal scale B(s)/h in GHz; s must lie in [0, 1].
  double B(double s) const;

  const ScheduleCoeffs& coeffs() const { return c_; }
  const std::optional<ScheduleFitReport>& fit_report() const { return fit_; }

 private:
  void validate() const;

  ScheduleCoeffs c_;
  std::optional<ScheduleFitReport> fit_;

  friend AnnealSchedule fit_schedule(const std::vector<struct ScheduleRow>&);
};

// One tabulated schedule sample: s plus both energy scales in GHz.
struct ScheduleRow {
  double s = 0.0;
  double A = 0.0;
  double B = 0.0;
};

// Least-squares fit of the closed forms to a tabulated schedule. The A fit is
// linear in log space, log(A/(1-s)) against {1, s, s^2, s^3}, and skips rows
// with s ~ 1 or A <= 0; the B fit is an ordinary quadratic fit.
AnnealSchedule fit_schedule(const std::vector<ScheduleRow>& table);

std::vector<ScheduleRow> load_schedule_csv(const std::string& path);
void save_schedule_csv(const std::string& path, const AnnealSchedule& sched,
                       int points = 51);

// Reverse-anneal control path: ramp s from 1 down to s_r over t_reverse_us,
// hold at s_r for t_wait_us, ramp back to 1 over t_forward_us.
struct ReverseProtocol {
  double s_r = 0.7;
  double t_reverse_us = 1.0;
  double t_wait_us = 0.0;
  double t_forward_us = 1.0;

  double t_end_us() const { return t_reverse_us + t_wait_us + t_forward_us; }
};

// Fixed 1 us ramps on both sides; the wait stretches to reach t_end_us.
ReverseProtocol wts_protocol(double s_r, double t_end_us,
                             bool allow_long = false);
// No wait; both ramps stretch to t_end_us / 2.
ReverseProtocol ats_protocol(double s_r, double t_end_us,
                             bool allow_long = false);

inline constexpr double kMaxProtocolUs = 2000.0;

// Rejects s_r outside (0, 1), negative segment lengths, zero total length,
// and totals beyond kMaxProtocolUs unless allow_long.
void validate_protocol(const ReverseProtocol& p, bool allow_long = false);

// Piecewise-linear s(t); exact s_r (no roundoff) inside the hold segment.
double s_of_t(const ReverseProtocol& p, double t_us);

// Splitting of the annealer spectrum for a decoupled spin with bias h1:
// 2 * sqrt(A(s)^2 + B(s)^2 * h1^2), in GHz.
double energy_gap(const AnnealSchedule& sched, double h1, double s);

// Scale factor between inverse problem temperature and physical temperature,
// beta = eta / T[K], fixed by the final longitudinal scale B(1).
double eta_from_schedule(const AnnealSchedule& sched);

inline constexpr double kEtaDefault = 0.206;

struct TemperatureConversion {
  double eta = kEtaDefault;

  static TemperatureConversion from_schedule(const AnnealSchedule& sched) {
    return TemperatureConversion{eta_from_schedule(sched)};
  }
  double beta_to_temperature_mk(double beta) const;
  double temperature_mk_to_beta(double t_mk) const;
};

// Coefficient file (JSON object with keys A_a..A_d, B_a..B_c, eta).
struct ScheduleConfig {
  ScheduleCoeffs coeffs;
  double eta = kEtaDefault;
  // Set when the stored eta disagrees with the one implied by B(1) by more
  // than 5%; coeffs-derived eta replaces the stored one in that case.
  std::optional<std::string> eta_warning;
};

ScheduleConfig load_schedule_config(const std::string& path);
void save_schedule_config(const std::string& path, const ScheduleCoeffs& c,
                          double eta);

}  // namespace ralab
