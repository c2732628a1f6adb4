#include "ralab/scans.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "ralab/equilibrium.hpp"
#include "ralab/markov.hpp"

namespace ralab {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Ground-state configuration indices, canonical order.
std::vector<std::uint32_t> ground_states(const IsingProblem& p) {
  Spectrum spec = enumerate_spectrum(p);
  double e0 = spec.ground_energy();
  std::vector<std::uint32_t> out;
  std::uint32_t total = 1u << p.n;
  for (std::uint32_t idx = 0; idx < total; ++idx) {
    if (energy(p, spins_from_index(idx, p.n)) - e0 <= 1e-9) {
      out.push_back(idx);
    }
  }
  return out;
}

IsingProblem resolve_problem(const ScanConfig& cfg) {
  IsingProblem p = builtin_problem(cfg.problem);
  if (cfg.degeneracy_lift != 0.0) {
    if (p.n != 2) {
      throw InputError("degeneracy lift applies to two-spin problems only");
    }
    p.h[0] *= 1.0 + cfg.degeneracy_lift;
    p.h[1] *= 1.0 - cfg.degeneracy_lift;
  }
  return p;
}

struct PointOutput {
  std::vector<double> p_exact;
  bool fallback = false;
};

// Exact probabilities at t_end for one grid point.
class PointRunner {
 public:
  PointRunner(const ScanConfig& cfg, const AnnealSchedule& sched,
              const IsingProblem& problem, double rate_scale)
      : cfg_(cfg), sched_(sched), problem_(problem) {
    switch (cfg.backend) {
      case Backend::bloch: {
        if (problem.n != 1) {
          throw InputError("bloch backend needs a 1-spin problem");
        }
        labels_ = {"u", "d"};
        bloch_ = cfg.bloch_params;
        if (rate_scale != 1.0) {
          bloch_.T1_us /= rate_scale;
          bloch_.T2_us /= rate_scale;
        }
        bloch_.validate();
        if (cfg.initial_state != "u" && cfg.initial_state != "d") {
          throw InputError("1-spin initial state must be 'u' or 'd'");
        }
        break;
      }
      case Backend::lindblad2: {
        if (problem.n != 2) {
          throw InputError("lindblad2 backend needs a 2-spin problem");
        }
        labels_ = {"uu", "ud", "du", "dd"};
        rates_ = scaled(cfg.rates, rate_scale);
        x0_ = coeffs_from_state(cfg.initial_state);
        break;
      }
      case Backend::markov: {
        rates_ = scaled(cfg.rates, rate_scale);
        if (problem.n == 1) {
          labels_ = {"u", "d"};
          w_ = build_two_level(rates_.g1, rates_.g2);
        } else if (problem.n == 2) {
          labels_ = {"uu", "ud", "du", "dd"};
          w_ = build_four_level(rates_);
        } else {
          auto grounds = ground_states(problem);
          if (grounds.size() != 4) {
            throw InputError(
                "markov backend beyond 2 spins needs exactly 4 ground "
                "states, found " +
                std::to_string(grounds.size()));
          }
          for (auto idx : grounds) {
            labels_.push_back(state_label(idx, problem.n));
          }
          w_ = build_four_level(rates_);
        }
        auto it = std::find(labels_.begin(), labels_.end(),
                            cfg.initial_state);
        if (it == labels_.end()) {
          throw InputError("initial state '" + cfg.initial_state +
                           "' is not one of the tracked states");
        }
        p0_ = Eigen::VectorXd::Zero(static_cast<int>(labels_.size()));
        p0_(it - labels_.begin()) = 1.0;
        break;
      }
    }
  }

  const std::vector<std::string>& labels() const { return labels_; }

  PointOutput run(double t_end) const {
    PointOutput out;
    switch (cfg_.backend) {
      case Backend::bloch: {
        ReverseProtocol prot = make_protocol(t_end);
        BlochRun r = run_1spin_protocol(sched_, problem_.h[0], bloch_, prot,
                                        cfg_.plan, cfg_.initial_state[0]);
        out.p_exact = {r.points.back().p_up, r.points.back().p_down};
        out.fallback = r.trajectory.fallback_used;
        break;
      }
      case Backend::lindblad2: {
        ReverseProtocol prot = make_protocol(t_end);
        TwoSpinRun r = run_2spin_protocol(sched_, problem_, rates_, prot,
                                          cfg_.plan, x0_);
        const Eigen::Vector4d& p = r.probs.back();
        out.p_exact = {p(0), p(1), p(2), p(3)};
        out.fallback = r.trajectory.fallback_used;
        break;
      }
      case Backend::markov: {
        // the protocol shape is irrelevant at fixed rates; only t_end enters
        Eigen::VectorXd p = propagate_markov(w_, p0_, t_end);
        out.p_exact.assign(p.data(), p.data() + p.size());
        break;
      }
    }
    return out;
  }

 private:
  ReverseProtocol make_protocol(double t_end) const {
    return cfg_.mode == ScanMode::wts
               ? wts_protocol(cfg_.s_r, t_end, cfg_.allow_long)
               : ats_protocol(cfg_.s_r, t_end, cfg_.allow_long);
  }

  const ScanConfig& cfg_;
  const AnnealSchedule& sched_;
  const IsingProblem& problem_;
  std::vector<std::string> labels_;
  BlochParams bloch_;
  RateSet rates_;
  Coeffs16 x0_;
  Eigen::MatrixXd w_;
  Eigen::VectorXd p0_;
};

}  // namespace

ScanMode scan_mode_from_string(const std::string& name) {
  if (name == "wts" || name == "WTS") return ScanMode::wts;
  if (name == "ats" || name == "ATS") return ScanMode::ats;
  throw InputError("unknown scan mode '" + name + "'");
}

Backend backend_from_string(const std::string& name) {
  if (name == "bloch") return Backend::bloch;
  if (name == "lindblad2") return Backend::lindblad2;
  if (name == "markov") return Backend::markov;
  throw InputError("unknown backend '" + name + "'");
}

std::string to_string(ScanMode m) { return m == ScanMode::wts ? "wts" : "ats"; }

std::string to_string(Backend b) {
  switch (b) {
    case Backend::bloch: return "bloch";
    case Backend::lindblad2: return "lindblad2";
    default: return "markov";
  }
}

std::vector<double> TGrid::make() const {
  std::vector<double> out;
  if (kind == Kind::explicit_list) {
    out = values;
  } else {
    if (points < 1) throw InputError("grid needs at least 1 point");
    if (!(min_us <= max_us)) throw InputError("grid needs min <= max");
    if (points == 1) {
      out.push_back(min_us);
    } else if (kind == Kind::linear) {
      for (int i = 0; i < points; ++i) {
        out.push_back(min_us +
                      (max_us - min_us) * i / static_cast<double>(points - 1));
      }
    } else {
      if (!(min_us > 0.0)) {
        throw InputError("logarithmic grid needs positive times");
      }
      double ratio = std::log(max_us / min_us);
      for (int i = 0; i < points; ++i) {
        out.push_back(min_us *
                      std::exp(ratio * i / static_cast<double>(points - 1)));
      }
    }
  }
  if (out.empty()) throw InputError("empty time grid");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) throw InputError("grid times must be nonnegative");
    if (i > 0 && out[i] <= out[i - 1]) {
      throw InputError("grid times must be strictly increasing");
    }
  }
  return out;
}

double RateModel::multiplier(const AnnealSchedule& sched, double s_r,
                             double h1) const {
  if (!enabled) return 1.0;
  double gap = energy_gap(sched, h1, s_r);
  return gamma0 * std::exp(-c1 * gap) * std::pow(sched.A(s_r), c2);
}

void ScanConfig::validate() const {
  if (samples_per_point < 1) throw InputError("samples_per_point must be >= 1");
  if (workers < 1) throw InputError("workers must be >= 1");
  if (!(s_r > 0.0 && s_r < 1.0)) {
    throw InputError("reversal point s_r must lie in (0, 1)");
  }
  auto grid_values = grid.make();
  if (!allow_long && grid_values.back() > kMaxProtocolUs + 1e-9) {
    throw InputError("grid exceeds the " + std::to_string(kMaxProtocolUs) +
                     " us protocol bound");
  }
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<long> multinomial_sample(const std::vector<double>& p, long n,
                                     std::mt19937_64& rng) {
  if (p.empty()) throw InputError("empty probability vector");
  std::vector<double> cum(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += std::max(p[i], 0.0);
    cum[i] = total;
  }
  if (!(total > 0.0)) throw InputError("probabilities sum to zero");
  std::vector<long> counts(p.size(), 0);
  for (long k = 0; k < n; ++k) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    std::size_t idx =
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    if (idx >= p.size()) idx = p.size() - 1;
    ++counts[idx];
  }
  return counts;
}

ScanResult run_scan(const ScanConfig& cfg) {
  cfg.validate();
  AnnealSchedule sched(cfg.schedule);
  IsingProblem problem = resolve_problem(cfg);
  double rate_scale =
      cfg.rate_model.multiplier(sched, cfg.s_r, problem.h.empty()
                                                    ? 0.0
                                                    : problem.h[0]);
  PointRunner runner(cfg, sched, problem, rate_scale);
  std::vector<double> grid = cfg.grid.make();

  ScanResult result;
  result.labels = runner.labels();
  result.samples_per_point = cfg.samples_per_point;
  result.points.resize(grid.size());

  std::vector<PointOutput> outputs(grid.size());
  auto run_range = [&](std::size_t begin, std::size_t stride,
                       std::exception_ptr& err) {
    try {
      for (std::size_t i = begin; i < grid.size(); i += stride) {
        outputs[i] = runner.run(grid[i]);
      }
    } catch (...) {
      err = std::current_exception();
    }
  };

  int workers = std::min<int>(cfg.workers, static_cast<int>(grid.size()));
  if (workers <= 1) {
    std::exception_ptr err;
    run_range(0, 1, err);
    if (err) std::rethrow_exception(err);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(run_range, w, workers, std::ref(errs[w]));
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    ScanPoint& pt = result.points[i];
    pt.t_end_us = grid[i];
    pt.p_exact = outputs[i].p_exact;
    result.fallback_used = result.fallback_used || outputs[i].fallback;
    std::mt19937_64 rng(split_seed(cfg.rng_seed, i));
    auto counts =
        multinomial_sample(pt.p_exact, cfg.samples_per_point, rng);
    pt.p_sampled.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      pt.p_sampled[k] = static_cast<double>(counts[k]) /
                        static_cast<double>(cfg.samples_per_point);
    }
  }
  return result;
}

Series extract_series(const ScanResult& r, const std::string& label,
                      bool sampled) {
  auto it = std::find(r.labels.begin(), r.labels.end(), label);
  if (it == r.labels.end()) {
    throw InputError("state '" + label + "' not present in scan");
  }
  std::size_t col = it - r.labels.begin();
  Series s;
  for (const auto& pt : r.points) {
    s.t.push_back(pt.t_end_us);
    s.p.push_back(sampled ? pt.p_sampled[col] : pt.p_exact[col]);
  }
  return s;
}

std::vector<SweepEntry> sweep_h1(const ScanConfig& base,
                                 const std::vector<double>& h1_list) {
  if (base.backend != Backend::bloch) {
    throw InputError("bias sweep runs on the bloch backend");
  }
  if (h1_list.empty()) throw InputError("empty h1 list");
  AnnealSchedule sched(base.schedule);
  std::vector<SweepEntry> out;
  for (double h1 : h1_list) {
    ScanConfig cfg = base;
    cfg.problem = "1S(" + fmt17(h1) + ")";
    SweepEntry e;
    e.parameter = h1;
    e.gap = energy_gap(sched, h1, base.s_r);
    e.a_sr = sched.A(base.s_r);
    e.scan = run_scan(cfg);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SweepEntry> sweep_sr(const ScanConfig& base,
                                 const std::vector<double>& sr_list) {
  if (base.backend != Backend::bloch) {
    throw InputError("reversal-point sweep runs on the bloch backend");
  }
  if (sr_list.empty()) throw InputError("empty s_r list");
  AnnealSchedule sched(base.schedule);
  IsingProblem problem = builtin_problem(base.problem);
  if (problem.n != 1) {
    throw InputError("reversal-point sweep needs a 1-spin problem");
  }
  std::vector<SweepEntry> out;
  for (double sr : sr_list) {
    if (!(sr >= 0.5 && sr <= 0.9)) {
      throw InputError("reversal points must lie in [0.5, 0.9]");
    }
    ScanConfig cfg = base;
    cfg.s_r = sr;
    SweepEntry e;
    e.parameter = sr;
    e.gap = energy_gap(sched, problem.h[0], sr);
    e.a_sr = sched.A(sr);
    e.scan = run_scan(cfg);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ChainSweepPoint> chain_equilibrium_sweep(
    const std::vector<int>& n_list, double J, double beta, long samples,
    std::uint64_t seed) {
  if (!(J < 0.0)) throw InputError("chain sweep needs a negative coupling");
  if (samples < 1) throw InputError("samples must be >= 1");
  std::vector<ChainSweepPoint> out;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    int n = n_list[i];
    Spectrum spec = chain_spectrum(n, J);
    auto probs = gibbs_level_probs(spec, beta);
    ChainSweepPoint pt;
    pt.n = n;
    pt.p_ground_exact = probs.front();
    pt.mean_energy_exact = chain_mean_energy(n, J, beta);
    std::mt19937_64 rng(split_seed(seed, i));
    auto counts = multinomial_sample(probs, samples, rng);
    pt.p_ground_sampled = static_cast<double>(counts.front()) /
                          static_cast<double>(samples);
    double e = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      e += spec.levels[k].energy * static_cast<double>(counts[k]);
    }
    pt.mean_energy_sampled = e / static_cast<double>(samples);
    out.push_back(pt);
  }
  return out;
}

void write_scan_csv(const std::string& path, const ScanResult& r) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write scan output: " + path);
  out << "t_end_us,state_label,p_exact,p_sampled,n_samples\n";
  for (const auto& pt : r.points) {
    for (std::size_t k = 0; k < r.labels.size(); ++k) {
      out << fmt17(pt.t_end_us) << ',' << r.labels[k] << ','
          << fmt17(pt.p_exact[k]) << ',' << fmt17(pt.p_sampled[k]) << ','
          << r.samples_per_point << "\n";
    }
  }
}

ScanConfig load_scan_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scan config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad JSON in " + path + ": " + e.what());
  }
  try {
    ScanConfig cfg;
    cfg.mode = scan_mode_from_string(j.value("mode", "wts"));
    cfg.backend = backend_from_string(j.value("backend", "bloch"));
    cfg.problem = j.value("problem", cfg.problem);
    cfg.s_r = j.value("s_r", cfg.s_r);
    cfg.initial_state = j.value("initial_state", cfg.initial_state);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      std::string kind = g.value("kind", "log");
      if (kind == "log") {
        cfg.grid.kind = TGrid::Kind::log_spaced;
      } else if (kind == "linear") {
        cfg.grid.kind = TGrid::Kind::linear;
      } else if (kind == "explicit") {
        cfg.grid.kind = TGrid::Kind::explicit_list;
      } else {
        throw InputError("unknown grid kind '" + kind + "'");
      }
      cfg.grid.min_us = g.value("min_us", cfg.grid.min_us);
      cfg.grid.max_us = g.value("max_us", cfg.grid.max_us);
      cfg.grid.points = g.value("points", cfg.grid.points);
      if (g.contains("values")) {
        cfg.grid.values = g.at("values").get<std::vector<double>>();
      }
    }
    cfg.samples_per_point = j.value("samples_per_point", cfg.samples_per_point);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    cfg.workers = j.value("workers", cfg.workers);
    if (j.contains("plan")) {
      cfg.plan.tau_us = j.at("plan").value("tau_us", cfg.plan.tau_us);
      cfg.plan.method = step_method_from_string(
          j.at("plan").value("method", "diagonalization"));
    }
    if (j.contains("bloch")) {
      const auto& b = j.at("bloch");
      cfg.bloch_params.T1_us = b.value("T1_us", cfg.bloch_params.T1_us);
      cfg.bloch_params.T2_us = b.value("T2_us", cfg.bloch_params.T2_us);
      cfg.bloch_params.M0 = b.value("M0", cfg.bloch_params.M0);
    }
    if (j.contains("rates")) {
      const auto& r = j.at("rates");
      cfg.rates.g1 = r.value("g1", 0.0);
      cfg.rates.g2 = r.value("g2", 0.0);
      cfg.rates.g3 = r.value("g3", 0.0);
      cfg.rates.g4 = r.value("g4", 0.0);
      cfg.rates.g5 = r.value("g5", 0.0);
      cfg.rates.g6 = r.value("g6", 0.0);
      cfg.rates.g7 = r.value("g7", 0.0);
      std::string unit = r.value("unit", "per_us");
      if (unit == "Hz") {
        cfg.rates = scaled(cfg.rates, 1e-6);
      } else if (unit != "per_us") {
        throw InputError("unknown rate unit '" + unit + "'");
      }
    }
    if (j.contains("rate_model")) {
      const auto& m = j.at("rate_model");
      cfg.rate_model.enabled = m.value("enabled", false);
      cfg.rate_model.gamma0 = m.value("gamma0", cfg.rate_model.gamma0);
      cfg.rate_model.c1 = m.value("c1", cfg.rate_model.c1);
      cfg.rate_model.c2 = m.value("c2", cfg.rate_model.c2);
    }
    cfg.degeneracy_lift = j.value("degeneracy_lift", 0.0);
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      cfg.schedule.A_a = s.value("A_a", cfg.schedule.A_a);
      cfg.schedule.A_b = s.value("A_b", cfg.schedule.A_b);
      cfg.schedule.A_c = s.value("A_c", cfg.schedule.A_c);
      cfg.schedule.A_d = s.value("A_d", cfg.schedule.A_d);
      cfg.schedule.B_a = s.value("B_a", cfg.schedule.B_a);
      cfg.schedule.B_b = s.value("B_b", cfg.schedule.B_b);
      cfg.schedule.B_c = s.value("B_c", cfg.schedule.B_c);
    }
    cfg.eta = j.value("eta", cfg.eta);
    cfg.allow_long = j.value("allow_long", false);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad scan config " + path + ": " + e.what());
  }
}

void save_scan_config(const std::string& path, const ScanConfig& cfg) {
  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["backend"] = to_string(cfg.backend);
  j["problem"] = cfg.problem;
  j["s_r"] = cfg.s_r;
  j["initial_state"] = cfg.initial_state;
  nlohmann::json g;
  switch (cfg.grid.kind) {
    case TGrid::Kind::log_spaced: g["kind"] = "log"; break;
    case TGrid::Kind::linear: g["kind"] = "linear"; break;
    case TGrid::Kind::explicit_list: g["kind"] = "explicit"; break;
  }
  g["min_us"] = cfg.grid.min_us;
  g["max_us"] = cfg.grid.max_us;
  g["points"] = cfg.grid.points;
  if (!cfg.grid.values.empty()) g["values"] = cfg.grid.values;
  j["grid"] = g;
  j["samples_per_point"] = cfg.samples_per_point;
  j["rng_seed"] = cfg.rng_seed;
  j["workers"] = cfg.workers;
  j["plan"] = {{"tau_us", cfg.plan.tau_us},
               {"method", to_string(cfg.plan.method)}};
  j["bloch"] = {{"T1_us", cfg.bloch_params.T1_us},
                {"T2_us", cfg.bloch_params.T2_us},
                {"M0", cfg.bloch_params.M0}};
  j["rates"] = {{"g1", cfg.rates.g1}, {"g2", cfg.rates.g2},
                {"g3", cfg.rates.g3}, {"g4", cfg.rates.g4},
                {"g5", cfg.rates.g5}, {"g6", cfg.rates.g6},
                {"g7", cfg.rates.g7}, {"unit", "per_us"}};
  j["rate_model"] = {{"enabled", cfg.rate_model.enabled},
                     {"gamma0", cfg.rate_model.gamma0},
                     {"c1", cfg.rate_model.c1},
                     {"c2", cfg.rate_model.c2}};
  j["degeneracy_lift"] = cfg.degeneracy_lift;
  j["schedule"] = {{"A_a", cfg.schedule.A_a}, {"A_b", cfg.schedule.A_b},
                   {"A_c", cfg.schedule.A_c}, {"A_d", cfg.schedule.A_d},
                   {"B_a", cfg.schedule.B_a}, {"B_b", cfg.schedule.B_b},
                   {"B_c", cfg.schedule.B_c}};
  j["eta"] = cfg.eta;
  j["allow_long"] = cfg.allow_long;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write scan config: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ralab
