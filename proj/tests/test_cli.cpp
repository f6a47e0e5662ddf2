#include "alfeld/mesh.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run(const std::string& args)
{
  const char* exe = std::getenv("ALFELD_CLI");
  CliRun r;
  if (!exe)
    return r;
  const std::string cmd = std::string(exe) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p)
    return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p))
    r.out += buf;
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
protected:
  fs::path dir;
  void SetUp() override
  {
    if (!std::getenv("ALFELD_CLI"))
      GTEST_SKIP() << "ALFELD_CLI not set";
    dir = fs::temp_directory_path() / ("alfeld_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override
  {
    if (!dir.empty())
      fs::remove_all(dir);
  }
};

} // namespace

TEST_F(Cli, ValidatePsiPasses)
{
  const CliRun r = run("validate --d 2 --k 2 --family high-psi --out " + (dir / "v.json").string());
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  EXPECT_NE(slurp(dir / "v.json").find("\"pass\": true"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo)
{
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("validate --bogus").status, 2);
  EXPECT_EQ(run("validate --d 5 --k 2").status, 2);
  EXPECT_EQ(run("validate --d 2 --k 2 --family bdm").status, 2);
  EXPECT_EQ(run("validate --d 2 --k 1 --family high-psi").status, 2);
  EXPECT_EQ(run("solve --method dg").status, 2);
  EXPECT_EQ(run("solve --box 2 --mesh x.msh").status, 2);
  EXPECT_EQ(run("infsup --d 2 --k 2 --pair rm").status, 2);
  EXPECT_EQ(run("convergence --config " + (dir / "missing.json").string()).status, 2);
}

TEST_F(Cli, InfsupLinearRmPair)
{
  const CliRun r = run("infsup --d 2 --k 1 --pair rm --levels 2");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("min beta"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST_F(Cli, ConvergenceCsvIsByteIdentical)
{
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  ASSERT_EQ(run("convergence --d 2 --k 2 --method hybrid --levels 2 --out " + a).status, 0);
  ASSERT_EQ(run("convergence --d 2 --k 2 --method hybrid --levels 2 --out " + b).status, 0);
  const std::string ca = slurp(a);
  EXPECT_EQ(ca, slurp(b));
  EXPECT_EQ(ca.rfind("level,h,dofs,err_sigma_L2", 0), 0u);
  // header plus two levels
  EXPECT_EQ(std::count(ca.begin(), ca.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(dir / "a.json"));
}

TEST_F(Cli, ConfigFileWithFlagOverride)
{
  {
    std::ofstream cfg(dir / "c.json");
    cfg << R"({"d": 2, "k": 2, "method": "stabilized", "mu": 1, "lambda": 1, "levels": 3, "mesh": "box", "box": 1})";
  }
  const std::string out = (dir / "r.csv").string();
  const CliRun r = run("convergence --config " + (dir / "c.json").string() + " --levels 2 --out " + out);
  ASSERT_EQ(r.status, 0) << r.out;
  const std::string csv = slurp(out);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(slurp(dir / "r.json").find("\"stabilized\""), std::string::npos);

  std::ofstream(dir / "bad.json") << R"({"d": "two"})";
  EXPECT_EQ(run("solve --config " + (dir / "bad.json").string()).status, 2);
}

TEST_F(Cli, SolveOnMeshFile)
{
  const std::string mesh = (dir / "m.txt").string();
  alfeld::write_mesh(mesh, alfeld::uniform_box_mesh(2, 2));
  const CliRun r = run("solve --d 2 --k 2 --method hybrid --mesh " + mesh + " --out " + (dir / "s.json").string());
  EXPECT_EQ(r.status, 0) << r.out;
  const std::string js = slurp(dir / "s.json");
  EXPECT_NE(js.find("\"err_sigma_L2\""), std::string::npos);
  EXPECT_NE(js.find("\"cells\": 8"), std::string::npos);
}
