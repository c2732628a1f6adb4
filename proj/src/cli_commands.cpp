#include "ralab/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ralab/equilibrium.hpp"
#include "ralab/fitting.hpp"
#include "ralab/problems.hpp"
#include "ralab/scans.hpp"

namespace ralab {
namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

int guard(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const FitError& e) {
    err << "error: " << e.what() << " (last iterate f1=" << e.last.f1
        << " f2=" << e.last.f2 << " f3=" << e.last.f3
        << " rms=" << e.last.rms_residual << ")\n";
    return 3;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

struct Csv {
  std::vector<std::string> header;  // empty when the file starts with data
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

bool is_number(const std::string& s) {
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  Csv csv;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line);
    if (first && !fields.empty() && !is_number(fields[0])) {
      csv.header = fields;
    } else {
      csv.rows.push_back(fields);
    }
    first = false;
  }
  if (csv.rows.empty()) throw InputError("no data rows in " + path);
  return csv;
}

double num_field(const Csv& csv, std::size_t row, int col,
                 const std::string& path) {
  if (col < 0 || static_cast<std::size_t>(col) >= csv.rows[row].size()) {
    throw InputError(path + ": row " + std::to_string(row + 1) +
                     " is missing a required column");
  }
  const std::string& s = csv.rows[row][col];
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw InputError(path + ": expected a number, got '" + s + "'");
  }
  return v;
}

struct XY {
  std::vector<double> x;
  std::vector<double> y;
};

// Scan tables carry one row per (t_end, state); pull one state's series.
XY scan_series(const Csv& csv, const CliOptions& opts,
               const std::string& path) {
  int ct = csv.column("t_end_us");
  int cl = csv.column("state_label");
  int cp = csv.column(opts.sampled ? "p_sampled" : "p_exact");
  if (ct < 0 || cl < 0 || cp < 0) {
    throw InputError(path + ": not a scan table (needs t_end_us, state_label" +
                     ", p_exact, p_sampled columns)");
  }
  std::string label = opts.label;
  if (label.empty()) label = csv.rows[0][cl];
  XY xy;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    if (csv.rows[r][cl] != label) continue;
    xy.x.push_back(num_field(csv, r, ct, path));
    xy.y.push_back(num_field(csv, r, cp, path));
  }
  if (xy.x.empty()) {
    throw InputError(path + ": no rows for state '" + label + "'");
  }
  return xy;
}

XY generic_series(const Csv& csv, const std::string& path) {
  XY xy;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    if (csv.rows[r].size() < 2) {
      throw InputError(path + ": need two columns per row");
    }
    xy.x.push_back(num_field(csv, r, 0, path));
    xy.y.push_back(num_field(csv, r, 1, path));
  }
  return xy;
}

XY load_series(const std::string& path, const CliOptions& opts) {
  Csv csv = read_csv(path);
  if (csv.column("state_label") >= 0) return scan_series(csv, opts, path);
  return generic_series(csv, path);
}

void write_report(const std::string& out_path, const nlohmann::json& j) {
  if (out_path.empty()) return;
  std::ofstream out(out_path);
  if (!out) throw InputError("cannot write " + out_path);
  out << j.dump(2) << "\n";
}

// A zero-field problem whose couplings form one consecutive run with a
// single value admits the closed-form chain spectrum at any size.
bool uniform_chain_coupling(const IsingProblem& p, double* J) {
  if (p.n < 2 || static_cast<int>(p.couplings.size()) != p.n - 1) return false;
  if (p.offset != 0.0) return false;
  for (double hv : p.h) {
    if (hv != 0.0) return false;
  }
  std::vector<double> j(p.couplings.size(), 0.0);
  std::vector<bool> seen(p.couplings.size(), false);
  for (const auto& c : p.couplings) {
    if (c.i != c.j + 1 || seen[c.j]) return false;
    seen[c.j] = true;
    j[c.j] = c.value;
  }
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (j[k] != j[0]) return false;
  }
  if (j[0] == 0.0) return false;
  *J = j[0];
  return true;
}

}  // namespace

int cmd_schedule_fit(const std::string& csv_path, const std::string& out_path,
                     std::ostream& out, std::ostream& err) {
  return guard(err, [&] {
    auto rows = load_schedule_csv(csv_path);
    AnnealSchedule fitted = fit_schedule(rows);
    double eta = eta_from_schedule(fitted);
    save_schedule_config(out_path, fitted.coeffs(), eta);
    const auto& rep = *fitted.fit_report();
    out << "fit over " << rows.size() << " rows (" << rep.rows_used_A
        << " used for A, " << rep.rows_used_B << " for B)\n"
        << "max relative residual A: " << fmt("%.3g", rep.max_rel_residual_A)
        << "\n"
        << "max relative residual B: " << fmt("%.3g", rep.max_rel_residual_B)
        << "\n"
        << "eta: " << fmt("%.6f", eta) << "\n"
        << "wrote " << out_path << "\n";
  });
}

namespace {

// Config variant {"chain_sweep": {...}}: equilibrium statistics over chain
// sizes instead of a protocol scan.
void run_chain_sweep(const nlohmann::json& spec, const std::string& out_path,
                     std::optional<std::uint64_t> seed, std::ostream& out) {
  std::vector<int> n_list = spec.at("n_list").get<std::vector<int>>();
  double J = spec.value("J", -0.1);
  double beta = spec.value("beta", 7.64);
  long samples = spec.value("samples", 4500L);
  std::uint64_t master = seed ? *seed : spec.value("seed", 1ull);
  auto points = chain_equilibrium_sweep(n_list, J, beta, samples, master);

  std::ofstream csv(out_path);
  if (!csv) throw InputError("cannot write " + out_path);
  csv << "n,p_ground_exact,p_ground_sampled,mean_energy_exact,"
         "mean_energy_sampled\n";
  char line[256];
  for (const auto& pt : points) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", pt.n,
                  pt.p_ground_exact, pt.p_ground_sampled, pt.mean_energy_exact,
                  pt.mean_energy_sampled);
    csv << line;
  }

  nlohmann::json meta;
  meta["version"] = kVersion;
  meta["command"] = "run-scan";
  meta["seed"] = master;
  meta["config"] = {{"chain_sweep",
                     {{"n_list", n_list},
                      {"J", J},
                      {"beta", beta},
                      {"samples", samples},
                      {"seed", master}}}};
  std::ofstream side(out_path + ".meta.json");
  side << meta.dump(2) << "\n";

  out << "chain sweep: " << points.size() << " sizes, " << samples
      << " samples each\n"
      << "wrote " << out_path << " and " << out_path << ".meta.json\n";
}

}  // namespace

int cmd_run_scan(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, std::optional<int> workers,
                 std::ostream& out, std::ostream& err) {
  return guard(err, [&] {
    {
      std::ifstream probe(config_path);
      if (!probe) throw InputError("cannot open scan config: " + config_path);
      nlohmann::json j;
      try {
        probe >> j;
      } catch (const nlohmann::json::exception& e) {
        throw InputError("bad JSON in " + config_path + ": " + e.what());
      }
      if (j.contains("chain_sweep")) {
        run_chain_sweep(j.at("chain_sweep"), out_path, seed, out);
        return;
      }
    }
    ScanConfig cfg = load_scan_config(config_path);
    if (seed) cfg.rng_seed = *seed;
    if (workers) cfg.workers = *workers;
    ScanResult result = run_scan(cfg);
    write_scan_csv(out_path, result);

    std::string sidecar = out_path + ".meta.json";
    save_scan_config(sidecar, cfg);
    std::ifstream in(sidecar);
    nlohmann::json config_json;
    in >> config_json;
    in.close();
    nlohmann::json meta;
    meta["version"] = kVersion;
    meta["command"] = "run-scan";
    meta["seed"] = cfg.rng_seed;
    meta["config"] = config_json;
    std::ofstream side(sidecar);
    side << meta.dump(2) << "\n";

    out << "scan: " << result.points.size() << " points x "
        << result.labels.size() << " states, " << result.samples_per_point
        << " samples/point\n";
    if (result.fallback_used) {
      out << "note: product-formula fallback engaged on ill-conditioned "
             "steps\n";
    }
    out << "wrote " << out_path << " and " << sidecar << "\n";
  });
}

int cmd_fit(const std::string& csv_path, const std::string& kind,
            const std::string& out_path, const CliOptions& opts,
            std::ostream& out, std::ostream& err) {
  return guard(err, [&] {
    nlohmann::json report;
    report["kind"] = kind;
    report["input"] = csv_path;
    report["version"] = kVersion;
    std::string summary;

    if (kind == "saturating") {
      XY xy = load_series(csv_path, opts);
      SaturatingExpFit fit = fit_saturating_exp(xy.x, xy.y);
      report["f1"] = fit.f1;
      report["f2"] = fit.f2;
      report["f3"] = fit.f3;
      report["rms_residual"] = fit.rms_residual;
      report["iterations"] = fit.iterations;
      report["converged"] = fit.converged;
      report["f3_identifiable"] = fit.f3_identifiable;
      report["points"] = xy.x.size();
      summary = "f1=" + fmt("%.6g", fit.f1) + " f2=" + fmt("%.6g", fit.f2) +
                " f3=" + fmt("%.6g", fit.f3) +
                " rms=" + fmt("%.3g", fit.rms_residual);
    } else if (kind == "expdecay" || kind == "powerlaw") {
      XY xy = load_series(csv_path, opts);
      ScalingFit fit = kind == "expdecay"
                           ? fit_exp_decay(xy.x, xy.y, opts.x_min)
                           : fit_power_law(xy.x, xy.y);
      report["a"] = fit.a;
      report["b"] = fit.b;
      report["rms_log_residual"] = fit.rms_log_residual;
      report["points_used"] = fit.points_used;
      report["points_excluded"] = fit.points_excluded;
      summary = "a=" + fmt("%.6g", fit.a) + " b=" + fmt("%.6g", fit.b) +
                " rms(log)=" + fmt("%.3g", fit.rms_log_residual);
    } else if (kind == "beta_energy") {
      Csv csv = read_csv(csv_path);
      int cn = csv.column("n");
      int ce = csv.column(opts.sampled ? "mean_energy_sampled"
                                       : "mean_energy_exact");
      if (cn < 0 || ce < 0) {
        throw InputError(csv_path +
                         ": not a chain sweep table (needs n and "
                         "mean_energy columns)");
      }
      std::vector<std::pair<int, double>> data;
      for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        data.emplace_back(
            static_cast<int>(std::lround(num_field(csv, r, cn, csv_path))),
            num_field(csv, r, ce, csv_path));
      }
      BetaFitResult fit = fit_beta_to_energies(data, opts.J);
      TemperatureConversion conv{opts.eta};
      double t_mk = conv.beta_to_temperature_mk(fit.beta);
      report["beta"] = fit.beta;
      report["sse"] = fit.sse;
      report["J"] = opts.J;
      report["eta"] = opts.eta;
      report["temperature_mk"] = t_mk;
      report["points"] = data.size();
      summary = "beta=" + fmt("%.6g", fit.beta) + " T=" + fmt("%.4g", t_mk) +
                " mK sse=" + fmt("%.3g", fit.sse);
    } else {
      throw InputError(
          "unknown fit kind '" + kind +
          "' (expected saturating, expdecay, powerlaw, beta_energy)");
    }

    write_report(out_path, report);
    if (opts.json) {
      out << report.dump(2) << "\n";
    } else {
      out << kind << ": " << summary << "\n";
      if (!out_path.empty()) out << "wrote " << out_path << "\n";
    }
  });
}

int cmd_equilibrium(const std::string& problem, double beta,
                    const CliOptions& opts, std::ostream& out,
                    std::ostream& err) {
  return guard(err, [&] {
    if (!(beta >= 0.0)) throw InputError("beta must be >= 0");
    IsingProblem p = builtin_problem(problem);
    double chain_j = 0.0;
    bool closed_form = uniform_chain_coupling(p, &chain_j);
    Spectrum spec =
        closed_form ? chain_spectrum(p.n, chain_j) : enumerate_spectrum(p);
    auto level_probs = gibbs_level_probs(spec, beta);
    auto state_probs = gibbs_state_probs_per_level(spec, beta);
    TemperatureConversion conv{opts.eta};
    double t_mk = beta > 0.0
                      ? conv.beta_to_temperature_mk(beta)
                      : std::numeric_limits<double>::infinity();

    if (opts.json) {
      nlohmann::json j;
      j["problem"] = problem;
      j["n"] = p.n;
      j["beta"] = beta;
      j["eta"] = opts.eta;
      if (std::isfinite(t_mk)) j["temperature_mk"] = t_mk;
      j["closed_form"] = closed_form;
      nlohmann::json levels = nlohmann::json::array();
      for (std::size_t k = 0; k < spec.levels.size(); ++k) {
        nlohmann::json lvl;
        lvl["energy"] = spec.levels[k].energy;
        lvl["degeneracy"] = spec.levels[k].degeneracy;
        if (p.n <= kMaxEnumerationSpins) {
          lvl["representative"] =
              state_label(spec.levels[k].representative, p.n);
        }
        lvl["p_level"] = level_probs[k];
        lvl["p_per_state"] = state_probs[k];
        levels.push_back(lvl);
      }
      j["levels"] = levels;
      if (!closed_form && p.n <= 12) {
        auto probs = gibbs_probs_per_state(p, beta);
        nlohmann::json states = nlohmann::json::array();
        for (std::uint32_t idx = 0; idx < probs.size(); ++idx) {
          states.push_back({{"state", state_label(idx, p.n)},
                            {"p", probs[idx]}});
        }
        j["states"] = states;
      }
      out << j.dump(2) << "\n";
      return;
    }

    out << "problem: " << problem << " (" << p.n << " spins, "
        << spec.levels.size() << " levels)\n";
    out << "beta: " << fmt("%.6g", beta);
    if (std::isfinite(t_mk)) out << "  T: " << fmt("%.4f", t_mk) << " mK";
    out << "  eta: " << fmt("%.4g", opts.eta) << "\n\n";
    out << "  energy       degeneracy   p(level)    p(state)\n";
    std::size_t shown = std::min<std::size_t>(spec.levels.size(), 16);
    for (std::size_t k = 0; k < shown; ++k) {
      char line[160];
      std::snprintf(line, sizeof(line), "  %-12.6g %-12.6g %-11.6f %-11.6g",
                    spec.levels[k].energy, spec.levels[k].degeneracy,
                    level_probs[k], state_probs[k]);
      out << line;
      if (p.n <= kMaxEnumerationSpins) {
        out << "  e.g. " << state_label(spec.levels[k].representative, p.n);
      }
      out << "\n";
    }
    if (shown < spec.levels.size()) {
      out << "  ... (" << spec.levels.size() - shown << " more levels)\n";
    }
    if (!closed_form && p.n <= 4) {
      auto probs = gibbs_probs_per_state(p, beta);
      out << "\n  state   p\n";
      for (std::uint32_t idx = 0; idx < probs.size(); ++idx) {
        out << "  " << state_label(idx, p.n) << "      "
            << fmt("%.6f", probs[idx]) << "\n";
      }
    }
  });
}

}  // namespace ralab
