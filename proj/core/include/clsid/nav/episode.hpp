#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clsid/lti/transfer_function.hpp"
#include "clsid/nav/global_planner.hpp"
#include "clsid/planning/nmpc_problem.hpp"
#include "clsid/plant/profile.hpp"

namespace clsid {

struct EpisodeConfig {
  Scenario scenario = arch_scenario();
  PlantProfile plant = make_profile("cnn");
  /// Channel models the planner and the state estimator believe in.
  std::array<TransferFunction, 4> model = nominal_core();
  NmpcParams nmpc;
  double replan_rate = 5.0;      // Hz
  double command_lpf_fc = 0.5;   // Hz
  double sim_dt = 0.002;         // s
  double max_sim_time = 60.0;    // s
  double goal_tolerance = 0.3;   // m
  std::uint64_t seed = 0;
  /// Uniform start perturbation half-widths (m, rad), drawn from the seed.
  double start_position_jitter = 0.0;
  double start_yaw_jitter = 0.0;
  GridSpec grid;
  /// Ticks in a row without a usable plan before the episode aborts.
  int max_consecutive_failures = 3;

  void validate() const;
  /// Simulation steps between two replans.
  int steps_per_replan() const;
};

enum class Outcome { Reached, Timeout, Collision, Aborted };
const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& name);

/// Discrete planning model: per channel a second-order Butterworth command
/// filter at @p lpf_fc followed by the channel model, state order
/// [filter; model], sampled at @p dt.
StateSpaceModel planner_model(const std::array<TransferFunction, 4>& models, double lpf_fc, double dt);

/// One simulation step, recorded before the plant advances.
struct EpisodeSample {
  double time = 0.0;
  /// Ground truth, integrated from the plant's true velocities.
  Pose2 pose;
  /// Dead-reckoned from filtered velocity estimates; the planner sees this.
  Pose2 estimated_pose;
  Eigen::Vector4d command_raw = Eigen::Vector4d::Zero();
  Eigen::Vector4d command_filtered = Eigen::Vector4d::Zero();
  Eigen::Vector4d measured = Eigen::Vector4d::Zero();
  Eigen::Vector4d truth = Eigen::Vector4d::Zero();
  /// Euclidean gap to each obstacle for the bare robot radius (m).
  std::vector<double> clearance;
};

struct ReplanTick {
  double time = 0.0;
  PlanStatus status = PlanStatus::MaxIterations;
  bool accepted = false;
  int sqp_iterations = 0;
  double kkt_residual = 0.0;
  double solve_time = 0.0;  // s, wall clock
  Pose2 target;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  std::string diagnostic;
  Pose2 start;
  std::vector<Eigen::Vector2d> global_path;
  std::vector<EpisodeSample> samples;
  std::vector<ReplanTick> ticks;
  double final_time = 0.0;
  /// Smallest clearance over all steps and obstacles (inf without obstacles).
  double min_clearance = 0.0;
  /// Largest truth height minus hmax while inside a height region (m);
  /// -inf if the robot never entered one.
  double max_height_excess = 0.0;

  std::vector<double> solve_times() const;
};

/// Closed loop: global path, NMPC replanning toward the furthest visible
/// waypoint, command low-pass, surrogate plant, Kalman filter. Planning uses
/// a pose dead-reckoned from the filter's velocity estimates; collision,
/// height and goal checks use the pose integrated from true velocities.
EpisodeLog run_episode(const EpisodeConfig& cfg);

/// Runs independent episodes on up to @p threads workers; logs keep the
/// order of @p configs.
std::vector<EpisodeLog> run_episodes(const std::vector<EpisodeConfig>& configs, int threads = 0);

/// Per-step CSV, every @p stride-th sample. Solve times are left out so the
/// file is reproducible.
void write_episode_csv(std::ostream& os, const EpisodeLog& log, int stride = 1);

}  // namespace clsid
