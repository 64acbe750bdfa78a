#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "difflab/error.hpp"
#include "difflab/runner.hpp"
#include "difflab/scenario.hpp"

using namespace difflab;
namespace fs = std::filesystem;

namespace {

const char *kSmall = R"(name = small
[grid]
dim = 1
x_min = -2
x_max = 2
n_cells = 1024
[coefficient]
kind = c_delta
delta = 0.25
[regions]
a = -1, -0.5
b = 0.5, 1
[time]
t_min = 0.01
t_max = 0.1
count = 16
[varadhan]
tolerance = 0.1
[subordination]
quad_points = 512
[resistance]
from = -1
to = 1
[exhaustion]
radii = 0.5, 1, 1.5
[checks]
run = davies_gaffney, varadhan, subordination, propagation, resistance, exhaustion
)";

Scenario parse(const std::string &text)
{
  std::istringstream in(text);
  return parse_scenario(in, "small.ini");
}

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("difflab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Runner, ChecksRunInRequestedOrder)
{
  const fs::path dir = scratch("order");
  const RunResult r = run_scenario(parse(kSmall), {.out_dir = dir});
  ASSERT_EQ(r.checks.size(), 6u);
  EXPECT_EQ(r.checks[0].name, "davies_gaffney");
  EXPECT_EQ(r.checks[1].name, "varadhan");
  EXPECT_EQ(r.checks[5].name, "exhaustion");
  for (const auto &c : r.checks)
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_EQ(r.exit_code, kExitPass);
  for (const char *f : {"trace.csv", "distances.csv", "sweep.csv", "report.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_NE(slurp(dir / "report.txt").find("result: PASS"), std::string::npos);
}

TEST(Runner, OutputsAreBitIdentical)
{
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  const Scenario s = parse(kSmall);
  run_scenario(s, {.out_dir = d1});
  run_scenario(s, {.out_dir = d2});
  for (const char *f : {"trace.csv", "distances.csv", "sweep.csv", "report.txt"})
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
}

TEST(Runner, TraceCsvHeader)
{
  const fs::path dir = scratch("csv");
  run_scenario(parse(kSmall), {.out_dir = dir});
  const std::string trace = slurp(dir / "trace.csv");
  std::istringstream lines(trace);
  std::string schema, header;
  std::getline(lines, schema);
  std::getline(lines, header);
  EXPECT_EQ(schema, "#schema=1");
  EXPECT_EQ(header, "t,value,log_value,error_bound,solver");
  // Schema, header and one row per time.
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 18);
}

TEST(Runner, FailingCheckGivesExitOne)
{
  std::string text = kSmall;
  text.replace(text.find("tolerance = 0.1"), 15, "tolerance = 1e-9");
  const RunResult r = run_scenario(parse(text), {.out_dir = scratch("fail")});
  EXPECT_EQ(r.exit_code, kExitCheckFailed);
  EXPECT_FALSE(r.checks[1].passed);
  EXPECT_NE(r.report.find("[FAIL] varadhan"), std::string::npos);
}

TEST(Runner, ConfigErrorsBeforeWork)
{
  std::string text = kSmall;
  text.replace(text.find("a = -1, -0.5"), 12, "a = -1.95, -0.5");
  EXPECT_THROW(run_scenario(parse(text), {.out_dir = scratch("cfg")}), ConfigError);
}

TEST(Runner, FileEntryPointMapsErrors)
{
  const fs::path dir = scratch("file");
  std::string text = kSmall;
  text.replace(text.find("n_cells"), 7, "n_cels");
  std::ofstream(dir / "bad.ini") << text;
  std::ostringstream out, err;
  EXPECT_EQ(run_scenario_file(dir / "bad.ini", {.out_dir = dir / "out"}, out, err), kExitUsage);
  EXPECT_NE(err.str().find("n_cels"), std::string::npos) << err.str();
}

TEST(Runner, CheckListIsStable)
{
  const auto &checks = list_checks();
  ASSERT_GE(checks.size(), 8u);
  EXPECT_EQ(checks[0].name, "varadhan");
  EXPECT_EQ(checks[1].name, "davies_gaffney");
  std::ostringstream json;
  print_checks_json(json);
  EXPECT_NE(json.str().find("\"name\": \"varadhan\""), std::string::npos) << json.str();
  EXPECT_NE(json.str().find("\"davies_gaffney\""), std::string::npos);
}

#ifdef DIFFLAB_LAB_EXE
namespace {

int lab(const std::string &args)
{
  const int status = std::system((std::string("\"") + DIFFLAB_LAB_EXE + "\" " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Lab, ExitCodes)
{
  const fs::path dir = scratch("lab");
  std::ofstream(dir / "small.ini") << kSmall;
  std::string bad = kSmall;
  bad.replace(bad.find("n_cells"), 7, "n_cels");
  std::ofstream(dir / "bad.ini") << bad;
  EXPECT_EQ(lab("run " + (dir / "small.ini").string() + " --out " + (dir / "out").string()), 0);
  EXPECT_EQ(lab("run " + (dir / "bad.ini").string()), 2);
  EXPECT_EQ(lab("run " + (dir / "missing.ini").string()), 2);
  EXPECT_EQ(lab("frobnicate"), 2);
  EXPECT_EQ(lab("checks --json"), 0);
  EXPECT_EQ(lab("version"), 0);
}

TEST(Lab, ShippedConstantScenarioPasses)
{
  const fs::path dir = scratch("shipped");
  EXPECT_EQ(lab("run " + (fs::path(DIFFLAB_SCENARIO_DIR) / "constant_1d.ini").string() + " --out " + dir.string()), 0);
}
#endif
