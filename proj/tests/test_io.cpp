#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "clsid/error.hpp"
#include "clsid/io/atomic_file.hpp"
#include "clsid/io/json_io.hpp"
#include "clsid/plant/profile.hpp"

namespace clsid {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("clsid_io_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Json, TransferFunctionRoundTrip) {
  const auto tf = nominal_core()[0];
  const Json j = to_json(tf);
  EXPECT_EQ(j["poles"].size(), 3u);
  EXPECT_EQ(j["zeros"].size(), 2u);
  EXPECT_EQ(parse_transfer_function(j), tf);
}

TEST(Json, ScenarioRoundTrip) {
  const Scenario sc = arch_scenario();
  EXPECT_EQ(parse_scenario(to_json(sc)), sc);
}

TEST(Json, ScenarioPartialOverride) {
  const Json j = Json::parse(R"({"obstacles": [{"x": 1, "y": 2, "r": 0.3}], "goal": {"x": 4}})");
  const Scenario sc = parse_scenario(j);
  ASSERT_EQ(sc.obstacles.size(), 1u);
  EXPECT_DOUBLE_EQ(sc.obstacles[0].r, 0.3);
  EXPECT_DOUBLE_EQ(sc.goal.x, 4.0);
  EXPECT_DOUBLE_EQ(sc.goal.y, 0.0);
  EXPECT_DOUBLE_EQ(sc.robot_radius, 0.4);
}

TEST(Json, WrongTypeNamesField) {
  const Json j = Json::parse(R"({"robot_radius": "wide"})");
  try {
    parse_scenario(j);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("robot_radius"), std::string::npos);
  }
  EXPECT_THROW(parse_fit_config(Json::parse(R"({"poles": 2.5})")), ValidationError);
  EXPECT_THROW(parse_profile(Json::parse(R"({"name": "rnn"})")), ValidationError);
}

TEST(Json, ProfileRoundTrip) {
  PlantProfile p = make_profile("untrained");
  p.seed = 99;
  p.coupling_gain = 2.0;
  const PlantProfile q = parse_profile(to_json(p));
  EXPECT_EQ(q.name, p.name);
  EXPECT_EQ(q.core, p.core);
  EXPECT_EQ(q.seed, 99u);
  EXPECT_DOUBLE_EQ(q.coupling_gain, 2.0);
  EXPECT_DOUBLE_EQ(q.cubic_gain, p.cubic_gain);
  EXPECT_EQ(q.noise_std, p.noise_std);
  EXPECT_EQ(q.coupling_sources, p.coupling_sources);
}

TEST(Json, NmpcParamsRoundTrip) {
  NmpcParams p;
  p.horizon = 12;
  p.alpha = 0.7;
  p.Q(1, 1) = 3.0;
  p.input_bounds[0] = {-0.2, 0.8};
  const NmpcParams q = parse_nmpc_params(to_json(p));
  EXPECT_EQ(q.horizon, 12);
  EXPECT_DOUBLE_EQ(q.alpha, 0.7);
  EXPECT_EQ(q.Q, p.Q);
  EXPECT_EQ(q.R, p.R);
  EXPECT_EQ(q.K, p.K);
  EXPECT_DOUBLE_EQ(q.input_bounds[0].lo, -0.2);
  EXPECT_DOUBLE_EQ(q.input_bounds[0].hi, 0.8);
}

TEST(Json, SignalSpec) {
  const auto s = parse_signal_spec(
      Json::parse(R"({"kind": "chirp", "duration": 10, "amplitude": [-1, 1], "chirp_f1": 2})"));
  EXPECT_EQ(s.kind, SignalKind::Chirp);
  EXPECT_DOUBLE_EQ(s.duration, 10.0);
  EXPECT_DOUBLE_EQ(s.amplitude.lo, -1.0);
  EXPECT_DOUBLE_EQ(s.chirp_f1, 2.0);
}

TEST(Json, EpisodeLogRoundTrip) {
  EpisodeLog log;
  log.seed = 3;
  log.outcome = Outcome::Reached;
  log.final_time = 21.5;
  log.min_clearance = 0.42;
  log.max_height_excess = -0.1;
  log.start = {0.1, -0.2, 0.05};
  for (double t : {0.0, 0.2}) {
    ReplanTick tick;
    tick.time = t;
    tick.accepted = true;
    tick.solve_time = 0.05 + t;
    log.ticks.push_back(tick);
  }
  const Json j = to_json(log, false);
  EXPECT_FALSE(j["ticks"][0].contains("solve_time_s"));
  const Json timing{{"solve_times_s", {0.05, 0.25}}};
  const EpisodeLog back = parse_episode_log(j, &timing);
  EXPECT_EQ(back.seed, 3u);
  EXPECT_EQ(back.outcome, Outcome::Reached);
  EXPECT_DOUBLE_EQ(back.min_clearance, 0.42);
  EXPECT_EQ(back.start, log.start);
  EXPECT_EQ(back.solve_times(), (std::vector<double>{0.05, 0.25}));
  const Json bad_timing{{"solve_times_s", {0.05}}};
  EXPECT_THROW(parse_episode_log(j, &bad_timing), ValidationError);
}

TEST(Json, InfiniteClearanceSurvives) {
  EpisodeLog log;
  log.min_clearance = std::numeric_limits<double>::infinity();
  log.max_height_excess = -std::numeric_limits<double>::infinity();
  const EpisodeLog back = parse_episode_log(Json::parse(to_json(log, false).dump()));
  EXPECT_TRUE(std::isinf(back.min_clearance));
  EXPECT_TRUE(std::isinf(back.max_height_excess));
}

TEST(Files, AtomicWriteCreatesParents) {
  const fs::path dir = scratch_dir("atomic");
  const fs::path file = dir / "a" / "b" / "x.json";
  write_json_file(file, Json{{"k", 1}});
  EXPECT_EQ(read_json_file(file)["k"], 1);
  write_file_atomic(file, "replaced");
  EXPECT_EQ(read_file(file), "replaced");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(file.parent_path())) {
    (void)e;
    ++entries;
  }
  EXPECT_EQ(entries, 1u);
  fs::remove_all(dir);
}

TEST(Files, MalformedJsonIsValidationError) {
  const fs::path dir = scratch_dir("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"a\": ";
  EXPECT_THROW(read_json_file(dir / "bad.json"), ValidationError);
  EXPECT_THROW(read_file(dir / "missing.json"), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace clsid
