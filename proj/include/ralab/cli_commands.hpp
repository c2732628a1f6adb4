#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ralab/schedule.hpp"

namespace ralab {

inline constexpr const char* kVersion = "0.1.0";

// Options shared by the fit and equilibrium commands.
struct CliOptions {
  bool json = false;         // machine-readable stdout
  bool sampled = false;      // use the sampled columns instead of the exact
  std::string label;         // state series to fit; empty picks the first
  double J = -0.1;           // chain coupling for beta_energy fits
  double eta = kEtaDefault;  // scale for mK conversions
  double x_min = 1.0;        // exclusion threshold for expdecay fits
};

// Exit codes: 0 success, 2 input/config error, 3 numerical/fit failure.
int cmd_schedule_fit(const std::string& csv_path, const std::string& out_path,
                     std::ostream& out, std::ostream& err);

int cmd_run_scan(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, std::optional<int> workers,
                 std::ostream& out, std::ostream& err);

// kind: saturating | expdecay | powerlaw | beta_energy. Empty out_path skips
// the report file.
int cmd_fit(const std::string& csv_path, const std::string& kind,
            const std::string& out_path, const CliOptions& opts,
            std::ostream& out, std::ostream& err);

int cmd_equilibrium(const std::string& problem, double beta,
                    const CliOptions& opts, std::ostream& out,
                    std::ostream& err);

}  // namespace ralab
