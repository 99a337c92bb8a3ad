#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "clsid/io/json_io.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(CLSID_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("clsid_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string out(const std::string& sub = "") const { return " --out " + (dir / sub).string(); }
  fs::path dir;
};

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("fit --data /nonexistent/run.csv --channel vx"), 1);
  EXPECT_EQ(run("excite --channel roll" + out()), 1);
  EXPECT_EQ(run("excite --channel vx --dt -1" + out()), 1);
  EXPECT_EQ(run("excite --help"), 0);
}

TEST_F(Cli, ExciteIsReproducible) {
  const std::string args = "excite --profile cnn --channel vx --kind chirp --duration 20 --dt 0.005 --seed 3";
  ASSERT_EQ(run(args + out("a")), 0);
  ASSERT_EQ(run(args + out("b")), 0);
  const std::string a = slurp(dir / "a" / "experiment_vx.csv");
  EXPECT_EQ(a.substr(0, a.find('\n')), "t,u_vx,u_vy,u_z,u_wyaw,y_vx,y_vy,y_z,y_wyaw");
  EXPECT_EQ(a, slurp(dir / "b" / "experiment_vx.csv"));
}

TEST_F(Cli, FitWritesModel) {
  ASSERT_EQ(run("excite --profile linear_only --channel vx --kind chirp --duration 60 --dt 0.005" + out()), 0);
  ASSERT_EQ(run("fit --data " + (dir / "experiment_vx.csv").string() +
                " --channel vx --poles 3 --zeros 2 --decimation 2" + out()),
            0);
  const auto j = clsid::read_json_file(dir / "fit_vx.json");
  EXPECT_EQ(j["num"].size(), 3u);
  EXPECT_EQ(j["den"].size(), 4u);
  EXPECT_GE(j["fit_percent"].get<double>(), 99.0);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"channel": "z", "kind": "step", "duration": 5, "dt": 0.01})";
  ASSERT_EQ(run("excite --config " + (dir / "cfg.json").string() + out()), 0);
  EXPECT_TRUE(fs::exists(dir / "experiment_z.csv"));
  ASSERT_EQ(run("excite --config " + (dir / "cfg.json").string() + " --channel vy" + out()), 0);
  EXPECT_TRUE(fs::exists(dir / "experiment_vy.csv"));
}

TEST_F(Cli, AnalyzeNominal) {
  ASSERT_EQ(run("analyze --nominal vy" + out()), 0);
  const auto j = clsid::read_json_file(dir / "analysis_vy.json");
  EXPECT_TRUE(j.contains("hankel_singular_values"));
}

TEST_F(Cli, PlanningFailureExitsTwo) {
  fs::create_directories(dir);
  std::ofstream(dir / "blocked.json")
      << R"({"obstacles": [{"x": 3, "y": 0, "r": 0.5}], "goal": {"x": 3, "y": 0, "yaw": 0}})";
  EXPECT_EQ(run("navigate --scenario " + (dir / "blocked.json").string() + " --seeds 1" + out()), 2);
}

TEST_F(Cli, NavigateAndReport) {
  fs::create_directories(dir);
  std::ofstream(dir / "short.json") << R"({"goal": {"x": 1.5, "y": 0, "yaw": 0}})";
  ASSERT_EQ(run("navigate --scenario " + (dir / "short.json").string() +
                " --seeds 2 --max-time 20 --csv-stride 50" + out()),
            0);
  for (const char* f : {"episode_0.csv", "episode_0.json", "episode_1.json", "summary.json", "timing.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto summary = clsid::read_json_file(dir / "summary.json");
  EXPECT_EQ(summary["aggregate"]["reached"].get<int>(), 2);
  ASSERT_EQ(run("report --dir " + dir.string() + out()), 0);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
}

}  // namespace
