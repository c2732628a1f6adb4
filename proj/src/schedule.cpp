#include "ralab/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

namespace ralab {
namespace {

constexpr double kPlanckJs = 6.62607015e-34;
constexpr double kBoltzmannJk = 1.380649e-23;

void check_s_domain(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw InputError("anneal fraction s must lie in [0, 1], got " +
                     std::to_string(s));
  }
}

double fmt_num(const char* text, const std::string& path, int line_no) {
  char* end = nullptr;
  double v = std::strtod(text, &end);
  if (end == text) {
    throw InputError(path + ":" + std::to_string(line_no) +
                     ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

double AnnealSchedule::A(double s) const {
  check_s_domain(s);
  return (1.0 - s) *
         std::exp(c_.A_a + s * (c_.A_b + s * (c_.A_c + s * c_.A_d)));
}

double AnnealSchedule::B(double s) const {
  check_s_domain(s);
  return c_.B_a + s * (c_.B_b + s * c_.B_c);
}

void AnnealSchedule::validate() const {
  // The A form is nonnegative by construction; B must stay so on [0, 1].
  for (int i = 0; i <= 1000; ++i) {
    double s = i / 1000.0;
    double b = c_.B_a + s * (c_.B_b + s * c_.B_c);
    if (b < -1e-12) {
      throw InputError("schedule has B(" + std::to_string(s) +
                       ") = " + std::to_string(b) + " < 0");
    }
  }
}

AnnealSchedule fit_schedule(const std::vector<ScheduleRow>& table) {
  if (table.size() < 8) {
    throw InputError("schedule fit needs at least 8 table rows, got " +
                     std::to_string(table.size()));
  }
  for (const auto& r : table) {
    if (!(r.s >= 0.0 && r.s <= 1.0)) {
      throw InputError("schedule table has s outside [0, 1]");
    }
    if (r.A < 0.0 || r.B < 0.0) {
      throw InputError("schedule table has a negative energy scale");
    }
  }

  // A rows at s ~ 1 or A = 0 carry no information about the exponent.
  std::vector<const ScheduleRow*> a_rows;
  for (const auto& r : table) {
    if (r.s < 1.0 - 1e-9 && r.A > 0.0) a_rows.push_back(&r);
  }
  if (a_rows.size() < 4) {
    throw InputError("schedule fit needs at least 4 usable A rows");
  }

  Eigen::MatrixXd va(a_rows.size(), 4);
  Eigen::VectorXd ya(a_rows.size());
  for (std::size_t i = 0; i < a_rows.size(); ++i) {
    double s = a_rows[i]->s;
    va(i, 0) = 1.0;
    va(i, 1) = s;
    va(i, 2) = s * s;
    va(i, 3) = s * s * s;
    ya(i) = std::log(a_rows[i]->A / (1.0 - s));
  }
  Eigen::Vector4d ca = va.colPivHouseholderQr().solve(ya);

  Eigen::MatrixXd vb(table.size(), 3);
  Eigen::VectorXd yb(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    double s = table[i].s;
    vb(i, 0) = 1.0;
    vb(i, 1) = s;
    vb(i, 2) = s * s;
    yb(i) = table[i].B;
  }
  Eigen::Vector3d cb = vb.colPivHouseholderQr().solve(yb);

  ScheduleCoeffs c;
  c.A_a = ca(0);
  c.A_b = ca(1);
  c.A_c = ca(2);
  c.A_d = ca(3);
  c.B_a = cb(0);
  c.B_b = cb(1);
  c.B_c = cb(2);

  AnnealSchedule sched(c);
  ScheduleFitReport rep;
  rep.rows_used_A = static_cast<int>(a_rows.size());
  rep.rows_used_B = static_cast<int>(table.size());
  for (const auto* r : a_rows) {
    double rel = std::abs(sched.A(r->s) - r->A) / std::max(r->A, 1e-9);
    rep.max_rel_residual_A = std::max(rep.max_rel_residual_A, rel);
  }
  for (const auto& r : table) {
    double rel = std::abs(sched.B(r.s) - r.B) / std::max(r.B, 1e-9);
    rep.max_rel_residual_B = std::max(rep.max_rel_residual_B, rel);
  }
  sched.fit_ = rep;
  return sched;
}

std::vector<ScheduleRow> load_schedule_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schedule table: " + path);
  std::string line;
  std::vector<ScheduleRow> rows;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 3) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": expected 3 columns s,A,B");
    }
    if (!header_seen) {
      header_seen = true;
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) {
        // textual header: first column must be s, then the A and B scales
        const char* expected[] = {"s", "A", "B"};
        for (int k = 0; k < 3; ++k) {
          std::string name = fields[k];
          bool ok = k == 0 ? (name == "s" || name == "S")
                           : !name.empty() && (name[0] == expected[k][0] ||
                                               name[0] == expected[k][0] + 32);
          if (!ok) {
            throw InputError(path + ":" + std::to_string(line_no) +
                             ": unrecognized header column '" + name +
                             "' (expected " + expected[k] + "...)");
          }
        }
        continue;
      }
    }
    ScheduleRow r;
    r.s = fmt_num(fields[0].c_str(), path, line_no);
    r.A = fmt_num(fields[1].c_str(), path, line_no);
    r.B = fmt_num(fields[2].c_str(), path, line_no);
    rows.push_back(r);
  }
  if (rows.empty()) throw InputError("schedule table is empty: " + path);
  return rows;
}

void save_schedule_csv(const std::string& path, const AnnealSchedule& sched,
                       int points) {
  if (points < 2) throw InputError("schedule table needs at least 2 points");
  std::ofstream out(path);
  if (!out) throw InputError("cannot write schedule table: " + path);
  out << "s,A_over_h_GHz,B_over_h_GHz\n";
  char buf[128];
  for (int i = 0; i < points; ++i) {
    double s = static_cast<double>(i) / (points - 1);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s, sched.A(s),
                  sched.B(s));
    out << buf;
  }
}

ReverseProtocol wts_protocol(double s_r, double t_end_us, bool allow_long) {
  if (t_end_us < 2.0) {
    throw InputError(
        "waiting-time protocol needs t_end_us >= 2 (two 1 us ramps), got " +
        std::to_string(t_end_us));
  }
  ReverseProtocol p;
  p.s_r = s_r;
  p.t_reverse_us = 1.0;
  p.t_wait_us = t_end_us - 2.0;
  p.t_forward_us = 1.0;
  validate_protocol(p, allow_long);
  return p;
}

ReverseProtocol ats_protocol(double s_r, double t_end_us, bool allow_long) {
  ReverseProtocol p;
  p.s_r = s_r;
  p.t_reverse_us = t_end_us / 2.0;
  p.t_wait_us = 0.0;
  p.t_forward_us = t_end_us / 2.0;
  validate_protocol(p, allow_long);
  return p;
}

void validate_protocol(const ReverseProtocol& p, bool allow_long) {
  if (!(p.s_r > 0.0 && p.s_r < 1.0)) {
    throw InputError("reversal point s_r must lie in (0, 1), got " +
                     std::to_string(p.s_r));
  }
  if (p.t_reverse_us < 0.0 || p.t_wait_us < 0.0 || p.t_forward_us < 0.0) {
    throw InputError("protocol segment lengths must be nonnegative");
  }
  if (!(p.t_end_us() > 0.0)) {
    throw InputError("protocol has zero total length");
  }
  if (!allow_long && p.t_end_us() > kMaxProtocolUs + 1e-9) {
    throw InputError("protocol length " + std::to_string(p.t_end_us()) +
                     " us exceeds the " + std::to_string(kMaxProtocolUs) +
                     " us bound");
  }
}

double s_of_t(const ReverseProtocol& p, double t_us) {
  double t_end = p.t_end_us();
  if (t_us < -1e-12 || t_us > t_end * (1.0 + 1e-12) + 1e-12) {
    throw InputError("time " + std::to_string(t_us) +
                     " us outside protocol [0, " + std::to_string(t_end) +
                     "]");
  }
  if (t_us <= 0.0) return 1.0;
  if (t_us < p.t_reverse_us) {
    return 1.0 - (1.0 - p.s_r) * (t_us / p.t_reverse_us);
  }
  double t2 = t_us - p.t_reverse_us;
  if (t2 < p.t_wait_us) return p.s_r;
  double t3 = t2 - p.t_wait_us;
  if (p.t_forward_us <= 0.0 || t3 >= p.t_forward_us) return 1.0;
  return p.s_r + (1.0 - p.s_r) * (t3 / p.t_forward_us);
}

double energy_gap(const AnnealSchedule& sched, double h1, double s) {
  double a = sched.A(s);
  double b = sched.B(s) * h1;
  return 2.0 * std::sqrt(a * a + b * b);
}

double eta_from_schedule(const AnnealSchedule& sched) {
  // beta * E = E_GHz * h * 1e9 / (kB * T); the factor of 2 matches energies
  // written in units of B(1) for a single spin.
  return sched.B(1.0) * kPlanckJs * 1e9 / (2.0 * kBoltzmannJk);
}

double TemperatureConversion::beta_to_temperature_mk(double beta) const {
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  return eta / beta * 1000.0;
}

double TemperatureConversion::temperature_mk_to_beta(double t_mk) const {
  if (!(t_mk > 0.0)) throw InputError("temperature must be positive");
  return eta / (t_mk / 1000.0);
}

ScheduleConfig load_schedule_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schedule config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad JSON in " + path + ": " + e.what());
  }
  ScheduleConfig cfg;
  try {
    cfg.coeffs.A_a = j.at("A_a").get<double>();
    cfg.coeffs.A_b = j.at("A_b").get<double>();
    cfg.coeffs.A_c = j.at("A_c").get<double>();
    cfg.coeffs.A_d = j.at("A_d").get<double>();
    cfg.coeffs.B_a = j.at("B_a").get<double>();
    cfg.coeffs.B_b = j.at("B_b").get<double>();
    cfg.coeffs.B_c = j.at("B_c").get<double>();
    cfg.eta = j.value("eta", kEtaDefault);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("schedule config " + path +
                     " missing coefficient: " + e.what());
  }
  AnnealSchedule sched(cfg.coeffs);
  double eta_model = eta_from_schedule(sched);
  if (std::abs(eta_model - cfg.eta) > 0.05 * std::abs(cfg.eta)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "stored eta %.6g disagrees with B(1)-derived eta %.6g by "
                  ">5%%; using the derived value",
                  cfg.eta, eta_model);
    cfg.eta_warning = std::string(buf);
    cfg.eta = eta_model;
  }
  return cfg;
}

void save_schedule_config(const std::string& path, const ScheduleCoeffs& c,
                          double eta) {
  nlohmann::json j;
  j["A_a"] = c.A_a;
  j["A_b"] = c.A_b;
  j["A_c"] = c.A_c;
  j["A_d"] = c.A_d;
  j["B_a"] = c.B_a;
  j["B_b"] = c.B_b;
  j["B_c"] = c.B_c;
  j["eta"] = eta;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write schedule config: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ralab
