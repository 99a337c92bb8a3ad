#include "clsid/nav/episode.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "clsid/error.hpp"
#include "clsid/estimation/kalman.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/planning/kinematics.hpp"
#include "clsid/planning/sqp_solver.hpp"
#include "clsid/plant/surrogate_plant.hpp"
#include "clsid/signals/filter.hpp"
#include "clsid/sysid/stacked_model.hpp"

namespace clsid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Pose2 perturbed_start(const EpisodeConfig& cfg) {
  Pose2 p = cfg.scenario.start;
  if (cfg.start_position_jitter <= 0.0 && cfg.start_yaw_jitter <= 0.0) return p;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  p.x += cfg.start_position_jitter * unit(rng);
  p.y += cfg.start_position_jitter * unit(rng);
  p.yaw = wrap_angle(p.yaw + cfg.start_yaw_jitter * unit(rng));
  return p;
}

constexpr double kCoreProcessNoise = 1e-7;
constexpr double kOscillatorProcessNoise = 1e-5;

// Appends a harmonic oscillator at the gait's stepping frequency to the vy
// and wyaw outputs so the filter separates the sway from the core dynamics.
StateSpaceModel with_stepping_oscillator(const StateSpaceModel& core, const PlantProfile& profile,
                                         double dt) {
  if (profile.osc_amplitude <= 0.0) return core;
  const int n = core.states();
  const int extra = 4;
  const double w = 2.0 * std::numbers::pi * profile.osc_freq * dt;
  Eigen::Matrix2d rot;
  rot << std::cos(w), -std::sin(w), std::sin(w), std::cos(w);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + extra, n + extra);
  A.topLeftCorner(n, n) = core.A();
  A.block(n, n, 2, 2) = rot;
  A.block(n + 2, n + 2, 2, 2) = rot;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + extra, core.inputs());
  B.topRows(n) = core.B();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(core.outputs(), n + extra);
  C.leftCols(n) = core.C();
  C(index(Channel::Vy), n) = 1.0;
  C(index(Channel::Wyaw), n + 2) = 1.0;
  return StateSpaceModel(A, B, C, core.D(), dt);
}

bool plan_usable(const PlanResult& plan, const NmpcParams& params) {
  if (plan.status == PlanStatus::Optimal) return true;
  return plan.status == PlanStatus::MaxIterations && plan.dcbf_violation <= 1e2 * params.constraint_tol;
}

}  // namespace

void EpisodeConfig::validate() const {
  scenario.validate_geometry();
  plant.validate();
  nmpc.validate();
  require(replan_rate > 0.0, "replan_rate", "must be > 0");
  require(command_lpf_fc > 0.0 && command_lpf_fc < 0.6, "command_lpf_fc",
          "must lie in (0, 0.6) Hz to stay below the linearity cutoff");
  require(sim_dt > 0.0 && sim_dt <= nmpc.dt, "sim_dt", "must lie in (0, nmpc.dt]");
  require(max_sim_time > 0.0, "max_sim_time", "must be > 0");
  require(goal_tolerance > 0.0, "goal_tolerance", "must be > 0");
  require(start_position_jitter >= 0.0, "start_position_jitter", "must be >= 0");
  require(start_yaw_jitter >= 0.0, "start_yaw_jitter", "must be >= 0");
  require(max_consecutive_failures >= 0, "max_consecutive_failures", "must be >= 0");
  require(nmpc.horizon * nmpc.dt >= 2.0 / replan_rate - 1e-12, "replan_rate",
          "planning horizon must cover at least two replan periods");
  const double ratio = 1.0 / (replan_rate * sim_dt);
  require(std::abs(ratio - std::round(ratio)) < 1e-6, "replan_rate",
          "replan period must be a whole number of sim_dt steps");
}

int EpisodeConfig::steps_per_replan() const {
  return static_cast<int>(std::lround(1.0 / (replan_rate * sim_dt)));
}

StateSpaceModel planner_model(const std::array<TransferFunction, 4>& models, double lpf_fc, double dt) {
  const StateSpaceModel lpf = butterworth_state_space(lpf_fc);
  std::vector<StateSpaceModel> blocks;
  for (const auto& tf : models) blocks.push_back(series(lpf, tf_to_ss_ccf(tf)));
  return c2d_zoh(block_diagonal(blocks), dt);
}

Outcome outcome_from_string(const std::string& name) {
  for (Outcome o : {Outcome::Reached, Outcome::Timeout, Outcome::Collision, Outcome::Aborted}) {
    if (name == to_string(o)) return o;
  }
  throw ValidationError(fmt::format("unknown episode outcome '{}'", name));
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Reached: return "reached";
    case Outcome::Timeout: return "timeout";
    case Outcome::Collision: return "collision";
    case Outcome::Aborted: return "aborted";
  }
  return "unknown";
}

std::vector<double> EpisodeLog::solve_times() const {
  std::vector<double> out;
  out.reserve(ticks.size());
  for (const auto& t : ticks) out.push_back(t.solve_time);
  return out;
}

EpisodeLog run_episode(const EpisodeConfig& cfg) {
  cfg.validate();
  const Scenario& sc = cfg.scenario;
  const NmpcParams& params = cfg.nmpc;
  const int N = params.horizon;

  EpisodeLog log;
  log.seed = cfg.seed;
  log.start = perturbed_start(cfg);
  Scenario from_start = sc;
  from_start.start = log.start;
  log.global_path = global_path(from_start, cfg.grid);
  const double inflation = inflation_radius(sc, cfg.grid);

  const StateSpaceModel plan_model = planner_model(cfg.model, cfg.command_lpf_fc, params.dt);
  const StateSpaceModel lpf = c2d_zoh(butterworth_state_space(cfg.command_lpf_fc), cfg.sim_dt);
  const StackedModel core = stack_blocks(cfg.model);
  const StateSpaceModel core_model = c2d_zoh(core.combined, cfg.sim_dt);
  const std::vector<int> core_offsets = core.offsets();
  const int lpf_n = lpf.states();

  PlantProfile profile = cfg.plant;
  profile.seed = cfg.seed;
  SurrogatePlant plant(profile, cfg.sim_dt);
  plant.reset(params.u_nominal);

  Eigen::Vector4d noise_std;
  for (int c = 0; c < 4; ++c) noise_std(c) = profile.noise_std[c];
  const StateSpaceModel est_model = with_stepping_oscillator(core_model, profile, cfg.sim_dt);
  KalmanConfig kf_cfg = KalmanConfig::defaults(est_model.states(), noise_std);
  for (Eigen::Index i = 0; i < est_model.states(); ++i) {
    kf_cfg.process_noise(i, i) = i < core_model.states() ? kCoreProcessNoise : kOscillatorProcessNoise;
  }
  const Eigen::MatrixXd kf_gain = steady_state_gain(est_model, kf_cfg);
  Eigen::VectorXd x_hat = Eigen::VectorXd::Zero(est_model.states());
  x_hat.head(core_model.states()) = core_model.equilibrium(params.u_nominal);

  std::array<Eigen::VectorXd, 4> lpf_state;
  for (int c = 0; c < 4; ++c) {
    lpf_state[c] = lpf.equilibrium(Eigen::VectorXd::Constant(1, params.u_nominal(c)));
  }

  SolveOptions options;
  const int steps_per_tick = cfg.steps_per_replan();
  options.warm_start_shift =
      static_cast<int>(std::lround(steps_per_tick * cfg.sim_dt / params.dt));

  Pose2 pose = log.start;
  Pose2 believed = log.start;
  const double reach = params.output_bounds[0].hi * params.horizon * params.dt;
  std::size_t waypoint = 0;
  PlanResult plan;
  bool have_plan = false;
  double plan_time = 0.0;
  int failures = 0;
  double min_clearance = kInf;
  double height_excess = -kInf;

  const long long max_steps = static_cast<long long>(std::ceil(cfg.max_sim_time / cfg.sim_dt));
  log.samples.reserve(static_cast<std::size_t>(max_steps) + 1);
  log.outcome = Outcome::Timeout;
  long long step = 0;
  for (;; ++step) {
    const double t = static_cast<double>(step) * cfg.sim_dt;
    const Eigen::Vector2d position(pose.x, pose.y);
    if ((position - Eigen::Vector2d(sc.goal.x, sc.goal.y)).norm() <= cfg.goal_tolerance) {
      log.outcome = Outcome::Reached;
      break;
    }
    if (step >= max_steps) break;

    if (step % steps_per_tick == 0) {
      const Eigen::Vector2d here(believed.x, believed.y);
      waypoint = furthest_visible(log.global_path, waypoint, here, sc.obstacles, inflation);
      const Eigen::Vector2d aim = log.global_path[waypoint];
      const double dist = (aim - here).norm();
      // Pull the terminal target within what the horizon can cover.
      const Eigen::Vector2d goal_xy = dist > reach ? Eigen::Vector2d(here + (aim - here) * (reach / dist)) : aim;
      Pose2 target{goal_xy.x(), goal_xy.y(), believed.yaw};
      if (dist > cfg.goal_tolerance) {
        target.yaw = std::atan2(aim.y() - here.y(), aim.x() - here.x());
      }
      Eigen::VectorXd x0(plan_model.states());
      int at = 0;
      for (int c = 0; c < 4; ++c) {
        x0.segment(at, lpf_n) = lpf_state[c];
        at += lpf_n;
        const int nc = core.blocks[c].states();
        x0.segment(at, nc) = x_hat.segment(core_offsets[c], nc);
        at += nc;
      }
      ReplanTick tick;
      tick.time = t;
      tick.target = target;
      try {
        const NmpcProblem problem = build_problem(sc, plan_model, params, x0, believed, target);
        PlanResult next = solve(problem, have_plan ? &plan : nullptr, options);
        tick.status = next.status;
        tick.sqp_iterations = next.sqp_iterations;
        tick.kkt_residual = next.kkt_residual;
        tick.solve_time = next.solve_time;
        tick.accepted = plan_usable(next, params);
        if (tick.accepted) {
          plan = std::move(next);
          have_plan = true;
          plan_time = t;
        }
      } catch (const NumericalError&) {
        tick.status = PlanStatus::InfeasibleQp;
      }
      log.ticks.push_back(tick);
      failures = tick.accepted ? 0 : failures + 1;
      if (failures > cfg.max_consecutive_failures) {
        log.outcome = Outcome::Aborted;
        log.diagnostic = fmt::format("no usable plan for {} consecutive ticks at t = {:.3f} s",
                                     failures, t);
        break;
      }
    }

    EpisodeSample sample;
    sample.time = t;
    sample.pose = pose;
    sample.estimated_pose = believed;
    sample.command_raw = params.u_nominal;
    if (have_plan) {
      const int k = static_cast<int>(std::floor((t - plan_time) / params.dt + 1e-9));
      if (k < N) sample.command_raw = plan.inputs.row(k).transpose();
    }
    for (int c = 0; c < 4; ++c) {
      sample.command_filtered(c) = (lpf.C() * lpf_state[c])(0);
      lpf_state[c] = lpf.A() * lpf_state[c] + lpf.B().col(0) * sample.command_raw(c);
    }

    const PlantOutput out = plant.step(sample.command_filtered);
    sample.measured = out.measured;
    sample.truth = out.truth;

    sample.clearance.reserve(sc.obstacles.size());
    bool collided = false;
    for (const Obstacle& o : sc.obstacles) {
      const double gap = clearance(pose.x, pose.y, o, sc.robot_radius);
      sample.clearance.push_back(gap);
      min_clearance = std::min(min_clearance, gap);
      collided = collided || gap < 0.0;
    }
    for (const HeightRegion& r : sc.height_regions) {
      if (r.contains(pose.x, pose.y)) height_excess = std::max(height_excess, out.truth(2) - r.hmax);
    }
    log.samples.push_back(std::move(sample));
    if (collided) {
      log.outcome = Outcome::Collision;
      break;
    }

    // Filter: correct with the sample-k measurement, then predict with the
    // command applied over the step.
    x_hat += kf_gain * (out.measured - est_model.C() * x_hat);
    const Eigen::Vector4d v_hat = core_model.C() * x_hat.head(core_model.states());
    x_hat = est_model.A() * x_hat + est_model.B() * log.samples.back().command_filtered;

    pose = rollout_kinematics(pose, out.truth(0), out.truth(1), out.truth(3), cfg.sim_dt);
    believed = rollout_kinematics(believed, v_hat(0), v_hat(1), v_hat(3), cfg.sim_dt);
  }
  log.final_time = static_cast<double>(step) * cfg.sim_dt;
  log.min_clearance = min_clearance;
  log.max_height_excess = height_excess;
  return log;
}

std::vector<EpisodeLog> run_episodes(const std::vector<EpisodeConfig>& configs, int threads) {
  std::vector<EpisodeLog> logs(configs.size());
  if (configs.empty()) return logs;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(configs.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(configs.size());
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        logs[i] = run_episode(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return logs;
}

void write_episode_csv(std::ostream& os, const EpisodeLog& log, int stride) {
  if (stride < 1) throw ValidationError("write_episode_csv: stride must be >= 1");
  const std::size_t obstacles = log.samples.empty() ? 0 : log.samples.front().clearance.size();
  os << "t,x,y,yaw";
  for (const char* group : {"cmd", "cmd_lpf", "meas", "truth"}) {
    for (const char* ch : {"vx", "vy", "z", "wyaw"}) os << ',' << group << '_' << ch;
  }
  for (std::size_t i = 0; i < obstacles; ++i) os << ",clearance_" << i;
  os << '\n';
  for (std::size_t k = 0; k < log.samples.size(); k += static_cast<std::size_t>(stride)) {
    const EpisodeSample& s = log.samples[k];
    os << fmt::format("{:.3f},{:.6f},{:.6f},{:.6f}", s.time, s.pose.x, s.pose.y, s.pose.yaw);
    for (const Eigen::Vector4d* v : {&s.command_raw, &s.command_filtered, &s.measured, &s.truth}) {
      for (int c = 0; c < 4; ++c) os << fmt::format(",{:.6f}", (*v)(c));
    }
    for (double d : s.clearance) os << fmt::format(",{:.6f}", d);
    os << '\n';
  }
}

}  // namespace clsid
