#include <CLI11.hpp>
#include <difflab/runner.hpp>
#include <iostream>

int main(int argc, char **argv)
{
  CLI::App app{"difflab scenario runner"};
  app.require_subcommand(1);

  auto *run = app.add_subcommand("run", "run a scenario file");
  std::string scenario;
  difflab::RunOptions opts;
  std::string out_dir;
  run->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides the scenario's [output] directory)");
  run->add_option("--threads", opts.threads, "worker threads for refinement sweeps")->check(CLI::PositiveNumber);
  run->add_flag("--timing", opts.timing, "record wall times in distances.csv");

  auto *checks = app.add_subcommand("checks", "list available checks");
  bool json = false;
  checks->add_flag("--json", json, "machine-readable output");

  app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : difflab::kExitUsage;
  }

  if (*run) {
    opts.out_dir = out_dir;
    return difflab::run_scenario_file(scenario, opts, std::cout, std::cerr);
  }
  if (*checks) {
    if (json)
      difflab::print_checks_json(std::cout);
    else
      difflab::print_checks(std::cout);
    return 0;
  }
  std::cout << "lab " << DIFFLAB_VERSION_STRING << '\n';
  return 0;
}
