#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ralab/bloch.hpp"
#include "ralab/lindblad2.hpp"
#include "ralab/problems.hpp"
#include "ralab/schedule.hpp"

namespace ralab {

enum class ScanMode { wts, ats };
enum class Backend { bloch, lindblad2, markov };

ScanMode scan_mode_from_string(const std::string& name);
Backend backend_from_string(const std::string& name);
std::string to_string(ScanMode m);
std::string to_string(Backend b);

// Swept t_end values: either an explicit list or a generated grid.
struct TGrid {
  enum class Kind { log_spaced, linear, explicit_list };
  Kind kind = Kind::log_spaced;
  double min_us = 2.0;
  double max_us = 100.0;
  int points = 20;
  std::vector<double> values;  // explicit_list only

  std::vector<double> make() const;  // strictly increasing, validated
};

// Optional bridge between constant backend rates and the empirically
// gap/field-dependent relaxation: every configured rate is multiplied by
// gamma0 * exp(-c1 * gap(s_r)) * A(s_r)^c2.
struct RateModel {
  bool enabled = false;
  double gamma0 = 1.0;
  double c1 = 0.06;
  double c2 = 2.31;

  double multiplier(const AnnealSchedule& sched, double s_r, double h1) const;
};

struct ScanConfig {
  ScanMode mode = ScanMode::wts;
  Backend backend = Backend::bloch;
  std::string problem = "1S(0.1)";
  double s_r = 0.7;
  std::string initial_state = "d";
  TGrid grid;
  int samples_per_point = 4500;
  std::uint64_t rng_seed = 1;
  int workers = 1;
  StepPlan plan;
  BlochParams bloch_params{41.67, 41.67, -0.66};
  RateSet rates;
  RateModel rate_model;
  double degeneracy_lift = 0.0;
  ScheduleCoeffs schedule;
  double eta = kEtaDefault;
  bool allow_long = false;  // lift the 2000 us protocol bound

  void validate() const;
};

struct ScanPoint {
  double t_end_us = 0.0;
  std::vector<double> p_exact;
  std::vector<double> p_sampled;
};

struct ScanResult {
  std::vector<std::string> labels;  // state labels, fixed across points
  std::vector<ScanPoint> points;
  int samples_per_point = 0;
  bool fallback_used = false;
};

ScanResult run_scan(const ScanConfig& cfg);

// Deterministic per-point stream: splitmix64 mix of the master seed and the
// point index seeds an mt19937_64.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);
std::vector<long> multinomial_sample(const std::vector<double>& p, long n,
                                     std::mt19937_64& rng);

// Extracts (t_end, probability) series for one state label.
struct Series {
  std::vector<double> t;
  std::vector<double> p;
};
Series extract_series(const ScanResult& r, const std::string& label,
                      bool sampled);

struct SweepEntry {
  double parameter = 0.0;  // h1 or s_r
  double gap = 0.0;        // energy splitting at s_r
  double a_sr = 0.0;       // transverse scale at s_r
  ScanResult scan;
};

// One scan per h1 value (bloch backend); records the spectrum splitting.
std::vector<SweepEntry> sweep_h1(const ScanConfig& base,
                                 const std::vector<double>& h1_list);

// One scan per reversal point within [0.5, 0.9] at fixed h1.
std::vector<SweepEntry> sweep_sr(const ScanConfig& base,
                                 const std::vector<double>& sr_list);

struct ChainSweepPoint {
  int n = 0;
  double p_ground_exact = 0.0;
  double p_ground_sampled = 0.0;
  double mean_energy_exact = 0.0;
  double mean_energy_sampled = 0.0;
};

// Equilibrium statistics of uniform chains via the closed-form level
// structure; sampling draws multinomially over levels.
std::vector<ChainSweepPoint> chain_equilibrium_sweep(
    const std::vector<int>& n_list, double J, double beta, long samples,
    std::uint64_t seed);

// CSV rows: t_end_us, state_label, p_exact, p_sampled, n_samples.
void write_scan_csv(const std::string& path, const ScanResult& r);

ScanConfig load_scan_config(const std::string& path);
void save_scan_config(const std::string& path, const ScanConfig& cfg);

}  // namespace ralab
