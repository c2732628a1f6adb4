#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ralab/equilibrium.hpp"
#include "ralab/schedule.hpp"

using namespace ralab;

namespace {

// Tabulates the default closed forms; the independent reference for the fit.
std::vector<ScheduleRow> tabulate(const AnnealSchedule& sched, int points) {
  std::vector<ScheduleRow> rows;
  for (int i = 0; i < points; ++i) {
    double s = i / double(points - 1);
    rows.push_back({s, sched.A(s), sched.B(s)});
  }
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("energy scales at the anchor points") {
  AnnealSchedule sched;
  CHECK(sched.A(0.0) == doctest::Approx(std::exp(1.7918)).epsilon(1e-12));
  CHECK(sched.A(1.0) == 0.0);
  CHECK(sched.B(0.0) == doctest::Approx(0.60));
  CHECK(sched.B(1.0) == doctest::Approx(8.5848));
  // transverse scale is negligible past the reversal region
  CHECK(sched.A(0.7) < 0.003);
  CHECK(sched.A(0.7) > sched.A(0.8));
  CHECK_THROWS_AS(sched.A(-0.1), InputError);
  CHECK_THROWS_AS(sched.B(1.1), InputError);
}

TEST_CASE("negative longitudinal scale is rejected") {
  ScheduleCoeffs c;
  c.B_a = -1.0;
  CHECK_THROWS_AS(AnnealSchedule{c}, InputError);
}

TEST_CASE("least-squares fit recovers the generating coefficients") {
  AnnealSchedule truth;
  AnnealSchedule fitted = fit_schedule(tabulate(truth, 51));
  const ScheduleCoeffs& c = fitted.coeffs();
  const ScheduleCoeffs& t = truth.coeffs();
  CHECK(c.A_a == doctest::Approx(t.A_a).epsilon(1e-6));
  CHECK(c.A_b == doctest::Approx(t.A_b).epsilon(1e-6));
  CHECK(c.A_c == doctest::Approx(t.A_c).epsilon(1e-6));
  CHECK(c.A_d == doctest::Approx(t.A_d).epsilon(1e-6));
  CHECK(c.B_a == doctest::Approx(t.B_a).epsilon(1e-6));
  CHECK(c.B_b == doctest::Approx(t.B_b).epsilon(1e-6));
  CHECK(c.B_c == doctest::Approx(t.B_c).epsilon(1e-6));
  REQUIRE(fitted.fit_report().has_value());
  CHECK(fitted.fit_report()->max_rel_residual_A < 1e-8);
  CHECK(fitted.fit_report()->max_rel_residual_B < 1e-8);
  CHECK(fitted.fit_report()->rows_used_B == 51);
  // rows at s ~ 1 or A <= 0 cannot enter the log-space transverse fit
  CHECK(fitted.fit_report()->rows_used_A < 51);
}

TEST_CASE("fit input validation") {
  AnnealSchedule truth;
  CHECK_THROWS_AS(fit_schedule(tabulate(truth, 7)), InputError);
  auto rows = tabulate(truth, 12);
  rows[3].s = 1.2;
  CHECK_THROWS_AS(fit_schedule(rows), InputError);
}

TEST_CASE("schedule table csv round trip") {
  AnnealSchedule sched;
  const std::string path = "schedule_roundtrip_tmp.csv";
  save_schedule_csv(path, sched, 21);
  auto rows = load_schedule_csv(path);
  REQUIRE(rows.size() == 21);
  for (const auto& r : rows) {
    CHECK(r.A == doctest::Approx(sched.A(r.s)).epsilon(1e-12));
    CHECK(r.B == doctest::Approx(sched.B(r.s)).epsilon(1e-12));
  }
  std::remove(path.c_str());
}

TEST_CASE("csv header and cell validation name the offender") {
  const std::string path = "schedule_bad_tmp.csv";
  write_text(path, "bogus,A_over_h_GHz,B_over_h_GHz\n0.0,6.0,0.6\n");
  CHECK_THROWS_WITH_AS(load_schedule_csv(path),
                       doctest::Contains("bogus"), InputError);
  write_text(path, "s,A_over_h_GHz,B_over_h_GHz\n0.0,six,0.6\n");
  CHECK_THROWS_WITH_AS(load_schedule_csv(path),
                       doctest::Contains(":2"), InputError);
  write_text(path, "0.0,6.0\n");
  CHECK_THROWS_AS(load_schedule_csv(path), InputError);
  std::remove(path.c_str());
}

TEST_CASE("reverse protocol factories") {
  ReverseProtocol wts = wts_protocol(0.7, 4.0);
  CHECK(wts.s_r == 0.7);
  CHECK(wts.t_reverse_us == 1.0);
  CHECK(wts.t_wait_us == doctest::Approx(2.0));
  CHECK(wts.t_forward_us == 1.0);
  CHECK(wts.t_end_us() == doctest::Approx(4.0));

  ReverseProtocol ats = ats_protocol(0.7, 5.0);
  CHECK(ats.t_wait_us == 0.0);
  CHECK(ats.t_reverse_us == doctest::Approx(2.5));
  CHECK(ats.t_forward_us == doctest::Approx(2.5));

  // the fixed 1 us ramps leave no room for a wait below 2 us
  CHECK_THROWS_AS(wts_protocol(0.7, 1.9), InputError);
  CHECK_THROWS_AS(wts_protocol(0.7, 2500.0), InputError);
  CHECK_NOTHROW(wts_protocol(0.7, 2500.0, true));
  CHECK_THROWS_AS(ats_protocol(1.0, 4.0), InputError);
}

TEST_CASE("protocol validation rejects degenerate shapes") {
  ReverseProtocol p;
  p.s_r = 0.0;
  CHECK_THROWS_AS(validate_protocol(p), InputError);
  p = ReverseProtocol{};
  p.t_wait_us = -1.0;
  CHECK_THROWS_AS(validate_protocol(p), InputError);
  p = ReverseProtocol{0.7, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(validate_protocol(p), InputError);
  p = ReverseProtocol{0.7, 1000.0, 500.0, 1000.0};
  CHECK_THROWS_AS(validate_protocol(p), InputError);
  CHECK_NOTHROW(validate_protocol(p, true));
}

TEST_CASE("piecewise linear control path") {
  ReverseProtocol p = wts_protocol(0.7, 4.0);
  CHECK(s_of_t(p, 0.0) == 1.0);
  CHECK(s_of_t(p, 0.5) == doctest::Approx(0.85));
  // the hold segment returns the reversal point without roundoff
  CHECK(s_of_t(p, 1.0) == 0.7);
  CHECK(s_of_t(p, 1.7) == 0.7);
  CHECK(s_of_t(p, 3.0 - 1e-13) == 0.7);
  CHECK(s_of_t(p, 3.5) == doctest::Approx(0.85));
  CHECK(s_of_t(p, 4.0) == 1.0);
  CHECK_THROWS_AS(s_of_t(p, -0.5), InputError);
  CHECK_THROWS_AS(s_of_t(p, 4.5), InputError);

  ReverseProtocol a = ats_protocol(0.7, 2.0);
  CHECK(s_of_t(a, 0.5) == doctest::Approx(0.85));
  CHECK(s_of_t(a, 1.0) == 0.7);
  CHECK(s_of_t(a, 1.5) == doctest::Approx(0.85));
}

TEST_CASE("single-spin splitting formula") {
  AnnealSchedule sched;
  double a = sched.A(0.7);
  double b = sched.B(0.7);
  CHECK(energy_gap(sched, 0.1, 0.7) ==
        doctest::Approx(2.0 * std::sqrt(a * a + 0.01 * b * b)).epsilon(1e-12));
  CHECK(energy_gap(sched, 0.0, 0.7) == doctest::Approx(2.0 * a).epsilon(1e-12));
  CHECK(energy_gap(sched, 0.1, 1.0) ==
        doctest::Approx(0.2 * sched.B(1.0)).epsilon(1e-12));
}

TEST_CASE("inverse temperature to millikelvin") {
  AnnealSchedule sched;
  CHECK(eta_from_schedule(sched) == doctest::Approx(0.206003).epsilon(1e-4));

  TemperatureConversion conv;  // default eta
  CHECK(conv.beta_to_temperature_mk(6.93) ==
        doctest::Approx(29.7258).epsilon(1e-4));
  CHECK(conv.beta_to_temperature_mk(7.64) ==
        doctest::Approx(26.9634).epsilon(1e-4));
  CHECK(conv.temperature_mk_to_beta(conv.beta_to_temperature_mk(5.0)) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(conv.beta_to_temperature_mk(0.0), InputError);
  CHECK_THROWS_AS(conv.temperature_mk_to_beta(-3.0), InputError);

  // free-function variants share the same conversion
  CHECK(beta_to_temperature_mk(6.93) == conv.beta_to_temperature_mk(6.93));
  CHECK(temperature_mk_to_beta(29.7258) ==
        doctest::Approx(6.93).epsilon(1e-4));
}

TEST_CASE("coefficient config round trip") {
  AnnealSchedule sched;
  const std::string path = "schedule_config_tmp.json";
  save_schedule_config(path, sched.coeffs(), eta_from_schedule(sched));
  ScheduleConfig cfg = load_schedule_config(path);
  CHECK(cfg.coeffs.A_a == sched.coeffs().A_a);
  CHECK(cfg.coeffs.B_c == sched.coeffs().B_c);
  CHECK(cfg.eta == doctest::Approx(eta_from_schedule(sched)).epsilon(1e-12));
  CHECK_FALSE(cfg.eta_warning.has_value());
  std::remove(path.c_str());
}

TEST_CASE("config with inconsistent eta falls back to the derived value") {
  AnnealSchedule sched;
  const std::string path = "schedule_config_eta_tmp.json";
  save_schedule_config(path, sched.coeffs(), 0.5);
  ScheduleConfig cfg = load_schedule_config(path);
  REQUIRE(cfg.eta_warning.has_value());
  CHECK(cfg.eta == doctest::Approx(eta_from_schedule(sched)).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("missing config keys are input errors") {
  const std::string path = "schedule_config_missing_tmp.json";
  write_text(path, "{\"A_a\": 1.0}");
  CHECK_THROWS_AS(load_schedule_config(path), InputError);
  write_text(path, "not json");
  CHECK_THROWS_AS(load_schedule_config(path), InputError);
  CHECK_THROWS_AS(load_schedule_config("no_such_file_tmp.json"), InputError);
  std::remove(path.c_str());
}
