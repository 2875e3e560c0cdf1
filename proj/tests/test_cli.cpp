#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Result {
  int status;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(NL_SYSID_EXE) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

TEST(Cli, TheoryReportsRho) {
  const Result r = run("theory --n 2 --p 2 --a-norm 0.5 --beta 0.5 --b identity");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\"rho\": 5.333333"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("experiment --config does_not_exist.json").status, 2);
  EXPECT_EQ(run("theory --beta 3").status, 2);
}

TEST(Cli, BadConfigIsUsageError) {
  const fs::path p = fs::temp_directory_path() / "nlsysid_bad_config.json";
  std::ofstream(p) << "{\"n\": -3}";
  EXPECT_EQ(run("experiment --config " + p.string()).status, 2);
  std::ofstream(p) << "not json";
  EXPECT_EQ(run("experiment --config " + p.string()).status, 2);
  fs::remove(p);
}

TEST(Cli, VerifyDeterministicPasses) {
  const Result r = run("verify --suite deterministic");
  EXPECT_EQ(r.status, 0) << r.out;
}

TEST(Cli, SimulateWritesCsv) {
  const Result r = run("simulate --n 2 --p 3 --steps 5 --seed 4");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("t,u0,u1,u2,h0,h1\n", 0), 0u);
  EXPECT_EQ(r.out, run("simulate --n 2 --p 3 --steps 5 --seed 4").out);
}

TEST(Cli, TrainAndExperimentWriteArtifacts) {
  const fs::path dir = fs::temp_directory_path() / "nlsysid_cli_test";
  fs::remove_all(dir);
  EXPECT_EQ(run("train --n 2 --p 3 -N 50 --iterations 500 --out " + (dir / "train").string()).status, 0);
  EXPECT_TRUE(fs::exists(dir / "train" / "trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "train" / "weights.json"));

  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"n": 2, "p": 3, "N": 40, "a_norm": 0.5, "iterations": 300, "realizations": 2,
    "activations": [{"kind": "relu"}, {"kind": "leaky_relu", "beta": 0.5}], "seed": 3})";
  EXPECT_EQ(run("experiment --config " + cfg.string() + " --out " + (dir / "exp").string()).status, 0);
  EXPECT_TRUE(fs::exists(dir / "exp" / "relu.csv"));
  EXPECT_TRUE(fs::exists(dir / "exp" / "leaky_relu_0.5.csv"));
  EXPECT_TRUE(fs::exists(dir / "exp" / "summary.json"));
  fs::remove_all(dir);
}

}  // namespace
