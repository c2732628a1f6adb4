#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ralab/cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"reverse-anneal simulation laboratory"};
  app.require_subcommand(1);

  std::string config;
  std::string out_path;
  std::string kind;
  std::string problem;
  double beta = 0.0;
  ralab::CliOptions opts;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;

  auto* sched = app.add_subcommand(
      "schedule-fit", "fit closed-form coefficients to a tabulated schedule");
  sched->add_option("--config", config, "schedule CSV path")->required();
  sched->add_option("--out", out_path, "coefficient JSON path")->required();

  auto* scan =
      app.add_subcommand("run-scan", "run a configured protocol scan");
  scan->add_option("--config", config, "scan config JSON path")->required();
  scan->add_option("--out", out_path, "output CSV path")->required();
  scan->add_option("--seed", seed, "override the RNG seed");
  scan->add_option("--workers", workers, "override the worker count");

  auto* fit = app.add_subcommand("fit", "fit a model to tabulated output");
  fit->add_option("--config", config, "input CSV path")->required();
  fit->add_option("--kind", kind,
                  "saturating | expdecay | powerlaw | beta_energy")
      ->required();
  fit->add_option("--out", out_path, "report JSON path");
  fit->add_option("--label", opts.label, "state series to fit");
  fit->add_flag("--sampled", opts.sampled, "fit the sampled columns");
  fit->add_flag("--json", opts.json, "print the report JSON to stdout");
  fit->add_option("--J", opts.J, "chain coupling for beta_energy");
  fit->add_option("--eta", opts.eta, "temperature conversion scale");
  fit->add_option("--xmin", opts.x_min, "exclusion threshold for expdecay");

  auto* eq = app.add_subcommand("equilibrium",
                                "print the spectrum and Gibbs tables");
  eq->add_option("problem", problem, "problem name, e.g. 2S1 or chain(8)")
      ->required();
  eq->add_option("--beta", beta, "inverse temperature")->required();
  eq->add_flag("--json", opts.json, "machine-readable output");
  eq->add_option("--eta", opts.eta, "temperature conversion scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (sched->parsed()) {
    return ralab::cmd_schedule_fit(config, out_path, std::cout, std::cerr);
  }
  if (scan->parsed()) {
    return ralab::cmd_run_scan(config, out_path, seed, workers, std::cout,
                               std::cerr);
  }
  if (fit->parsed()) {
    return ralab::cmd_fit(config, kind, out_path, opts, std::cout, std::cerr);
  }
  return ralab::cmd_equilibrium(problem, beta, opts, std::cout, std::cerr);
}
