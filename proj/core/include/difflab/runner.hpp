#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "difflab/scenario.hpp"

namespace difflab {

struct CheckInfo
{
  std::string name;
  std::string description;
  std::string claim;
};

// Every check the runner knows, in a fixed order.
const std::vector<CheckInfo> &list_checks();
void print_checks(std::ostream &out);
void print_checks_json(std::ostream &out);

enum ExitCode : int
{
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitSolverFailure = 3,
};

struct RunOptions
{
  std::filesystem::path out_dir;  // empty: scenario [output] directory or <name>_output
  int threads = 1;
  bool timing = false;  // fills wall_time columns; off keeps outputs bit-identical
};

struct CheckOutcome
{
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunResult
{
  int exit_code = kExitPass;
  std::vector<CheckOutcome> checks;
  std::filesystem::path out_dir;
  std::string report;
};

// Runs the requested checks in order and writes trace.csv, distances.csv, sweep.csv and
// report.txt. Configuration problems throw ConfigError before anything is computed.
RunResult run_scenario(const Scenario &scenario, const RunOptions &opts);

// Loads, validates and runs; maps errors to exit codes and prints diagnostics to err.
int run_scenario_file(const std::filesystem::path &path, const RunOptions &opts, std::ostream &out,
                      std::ostream &err);

}  // namespace difflab
