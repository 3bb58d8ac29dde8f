#pragma once
// The five subcommands. Each returns an exit code:
//   0 pass, 1 claim failure, 2 config error, 3 missing or corrupt artifact,
//   4 solver failure.
// Artifacts inside the output directory:
//   steady.csv, apriori.json, convergence.csv (manufactured case only)
//   constants.json
//   timeseries.csv, manifest.json
//   verdicts.json, plots/<series>.dat
//   sweep.json and one kappa_<value>/ run directory per member (sweep)

#include <iosfwd>
#include <string>

#include "kvlab/config.hpp"

namespace kvlab {

enum ExitCode : int {
  exit_pass = 0,
  exit_claim_failure = 1,
  exit_config_error = 2,
  exit_artifact_error = 3,
  exit_solver_failure = 4,
};

struct CommandOptions {
  std::string config_path;  // flat config, or a manifest.json to re-execute
  std::string out_dir = "kvlab_out";
  std::string kappas = "0.1,0.01,0.001,0";
  bool allow_unstable = false;
  std::ostream* log = nullptr;  // progress and error messages; none if null
};

// A flat config file, or the config embedded in a run manifest.
RunConfig load_run_config(const std::string& path);

int cmd_steady(const CommandOptions& opt);
int cmd_spectral(const CommandOptions& opt);
int cmd_evolve(const CommandOptions& opt);
// Reads out_dir; config_path is not needed.
int cmd_verify(const CommandOptions& opt);
int cmd_sweep(const CommandOptions& opt);

}  // namespace kvlab
