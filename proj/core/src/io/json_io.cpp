#include "clsid/io/json_io.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "clsid/error.hpp"
#include "clsid/io/atomic_file.hpp"

namespace clsid {

namespace {

template <typename T>
void read(const Json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("field '{}': {}", key, e.what()));
  }
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ValidationError(fmt::format("{}: expected a JSON object", what));
}

Pose2 parse_pose(const Json& j, const char* key) {
  if (!j.is_object()) throw ValidationError(fmt::format("field '{}': expected {{x, y, yaw}}", key));
  Pose2 p;
  read(j, "x", p.x);
  read(j, "y", p.y);
  read(j, "yaw", p.yaw);
  return p;
}

Json pose_json(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}}; }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::Matrix4d parse_diag4(const Json& j, const char* key, const Eigen::Matrix4d& fallback) {
  std::vector<double> d;
  read(j, key, d);
  if (d.empty()) return fallback;
  if (d.size() != 4) throw ValidationError(fmt::format("field '{}': expected 4 diagonal entries", key));
  return Eigen::Vector4d(d[0], d[1], d[2], d[3]).asDiagonal();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(); }

}  // namespace

TransferFunction parse_transfer_function(const Json& j) {
  require_object(j, "transfer function");
  Polynomial num;
  Polynomial den;
  read(j, "num", num);
  read(j, "den", den);
  if (num.empty() || den.empty()) throw ValidationError("transfer function: 'num' and 'den' are required");
  return TransferFunction(num, den);
}

Scenario parse_scenario(const Json& j) {
  require_object(j, "scenario");
  Scenario sc;
  read(j, "robot_radius", sc.robot_radius);
  read(j, "safety_buffer", sc.safety_buffer);
  if (j.contains("obstacles")) {
    if (!j["obstacles"].is_array()) throw ValidationError("field 'obstacles': expected an array");
    for (const Json& o : j["obstacles"]) {
      Obstacle ob;
      read(o, "x", ob.x);
      read(o, "y", ob.y);
      read(o, "r", ob.r);
      sc.obstacles.push_back(ob);
    }
  }
  if (j.contains("height_regions")) {
    if (!j["height_regions"].is_array()) throw ValidationError("field 'height_regions': expected an array");
    for (const Json& h : j["height_regions"]) {
      HeightRegion r;
      read(h, "xmin", r.xmin);
      read(h, "xmax", r.xmax);
      read(h, "ymin", r.ymin);
      read(h, "ymax", r.ymax);
      read(h, "hmax", r.hmax);
      sc.height_regions.push_back(r);
    }
  }
  if (j.contains("start")) sc.start = parse_pose(j["start"], "start");
  if (j.contains("goal")) sc.goal = parse_pose(j["goal"], "goal");
  sc.validate_geometry();
  return sc;
}

PlantProfile parse_profile(const Json& j) {
  require_object(j, "profile");
  std::string name = "cnn";
  read(j, "name", name);
  PlantProfile p = make_profile(name);
  read(j, "osc_amplitude", p.osc_amplitude);
  read(j, "osc_freq", p.osc_freq);
  read(j, "noise_std", p.noise_std);
  read(j, "hf_distortion_gain", p.hf_distortion_gain);
  read(j, "coupling_gain", p.coupling_gain);
  read(j, "coupling_sources", p.coupling_sources);
  read(j, "cutoff", p.cutoff);
  read(j, "cubic_gain", p.cubic_gain);
  read(j, "seed", p.seed);
  if (j.contains("core")) {
    const Json& core = j["core"];
    if (!core.is_array() || core.size() != 4) {
      throw ValidationError("field 'core': expected four transfer functions");
    }
    for (int c = 0; c < 4; ++c) p.core[c] = parse_transfer_function(core[c]);
  }
  p.validate();
  return p;
}

NmpcParams parse_nmpc_params(const Json& j) {
  require_object(j, "nmpc");
  NmpcParams p;
  read(j, "horizon", p.horizon);
  read(j, "dt", p.dt);
  read(j, "alpha", p.alpha);
  read(j, "rho", p.rho);
  p.Q = parse_diag4(j, "Q", p.Q);
  p.R = parse_diag4(j, "R", p.R);
  p.dQ = parse_diag4(j, "dQ", p.dQ);
  std::vector<double> k;
  read(j, "K", k);
  if (!k.empty()) {
    if (k.size() != 3) throw ValidationError("field 'K': expected 3 diagonal entries");
    p.K = Eigen::Vector3d(k[0], k[1], k[2]).asDiagonal();
  }
  auto bounds = [&](const char* key, std::array<Interval, 4>& out) {
    std::vector<std::array<double, 2>> b;
    read(j, key, b);
    if (b.empty()) return;
    if (b.size() != 4) throw ValidationError(fmt::format("field '{}': expected 4 [lo, hi] pairs", key));
    for (int c = 0; c < 4; ++c) out[c] = Interval{b[c][0], b[c][1]};
  };
  bounds("output_bounds", p.output_bounds);
  bounds("input_bounds", p.input_bounds);
  std::vector<double> un;
  read(j, "u_nominal", un);
  if (!un.empty()) {
    if (un.size() != 4) throw ValidationError("field 'u_nominal': expected 4 entries");
    p.u_nominal = Eigen::Vector4d(un[0], un[1], un[2], un[3]);
  }
  read(j, "sqp_max_iter", p.sqp_max_iter);
  read(j, "kkt_tol", p.kkt_tol);
  read(j, "constraint_tol", p.constraint_tol);
  read(j, "height_margin", p.height_margin);
  read(j, "height_activation_expand", p.height_activation_expand);
  read(j, "dcbf_penalty_ratio", p.dcbf_penalty_ratio);
  read(j, "soft_penalty_ratio", p.soft_penalty_ratio);
  p.validate();
  return p;
}

SignalSpec parse_signal_spec(const Json& j) {
  require_object(j, "signal");
  SignalSpec s;
  std::string kind = to_string(s.kind);
  read(j, "kind", kind);
  s.kind = signal_kind_from_string(kind);
  read(j, "duration", s.duration);
  read(j, "dt", s.dt);
  std::array<double, 2> amp{s.amplitude.lo, s.amplitude.hi};
  std::array<double, 2> hold{s.hold.lo, s.hold.hi};
  read(j, "amplitude", amp);
  read(j, "hold", hold);
  s.amplitude = {amp[0], amp[1]};
  s.hold = {hold[0], hold[1]};
  read(j, "chirp_f0", s.chirp_f0);
  read(j, "chirp_f1", s.chirp_f1);
  read(j, "offset", s.offset);
  read(j, "seed", s.seed);
  s.validate();
  return s;
}

FitConfig parse_fit_config(const Json& j, FitConfig base) {
  require_object(j, "fit");
  read(j, "poles", base.n_poles);
  read(j, "zeros", base.n_zeros);
  read(j, "decimation", base.decimation);
  read(j, "max_iterations", base.max_iterations);
  read(j, "cost_tolerance", base.cost_tolerance);
  read(j, "gradient_tolerance", base.gradient_tolerance);
  read(j, "multistart", base.multistart);
  read(j, "allow_unstable", base.allow_unstable);
  read(j, "seed", base.seed);
  read(j, "kstep", base.kstep);
  base.validate();
  return base;
}

Json to_json(const TransferFunction& tf) {
  Json poles = Json::array();
  Json zeros = Json::array();
  for (const auto& p : roots(tf.den())) poles.push_back({p.real(), p.imag()});
  for (const auto& z : roots(tf.num())) zeros.push_back({z.real(), z.imag()});
  return {{"num", tf.num()}, {"den", tf.den()}, {"poles", poles}, {"zeros", zeros}};
}

Json to_json(const StateSpaceModel& ss) {
  Json j{{"A", matrix_json(ss.A())}, {"B", matrix_json(ss.B())},
         {"C", matrix_json(ss.C())}, {"D", matrix_json(ss.D())}};
  j["dt"] = ss.dt() ? Json(*ss.dt()) : Json();
  return j;
}

Json to_json(const Scenario& sc) {
  Json obstacles = Json::array();
  for (const Obstacle& o : sc.obstacles) obstacles.push_back({{"x", o.x}, {"y", o.y}, {"r", o.r}});
  Json regions = Json::array();
  for (const HeightRegion& r : sc.height_regions) {
    regions.push_back({{"xmin", r.xmin}, {"xmax", r.xmax}, {"ymin", r.ymin}, {"ymax", r.ymax}, {"hmax", r.hmax}});
  }
  return {{"robot_radius", sc.robot_radius}, {"safety_buffer", sc.safety_buffer},
          {"obstacles", obstacles},          {"height_regions", regions},
          {"start", pose_json(sc.start)},    {"goal", pose_json(sc.goal)}};
}

Json to_json(const PlantProfile& p) {
  Json core = Json::array();
  for (const auto& tf : p.core) core.push_back({{"num", tf.num()}, {"den", tf.den()}});
  return {{"name", p.name},
          {"core", core},
          {"osc_amplitude", p.osc_amplitude},
          {"osc_freq", p.osc_freq},
          {"noise_std", p.noise_std},
          {"hf_distortion_gain", p.hf_distortion_gain},
          {"coupling_gain", p.coupling_gain},
          {"coupling_sources", p.coupling_sources},
          {"cutoff", p.cutoff},
          {"cubic_gain", p.cubic_gain},
          {"seed", p.seed}};
}

Json to_json(const NmpcParams& p) {
  auto diag = [](const auto& m) {
    std::vector<double> d;
    for (Eigen::Index i = 0; i < m.rows(); ++i) d.push_back(m(i, i));
    return d;
  };
  auto bounds = [](const std::array<Interval, 4>& b) {
    Json out = Json::array();
    for (const Interval& i : b) out.push_back({i.lo, i.hi});
    return out;
  };
  return {{"horizon", p.horizon},
          {"dt", p.dt},
          {"alpha", p.alpha},
          {"rho", p.rho},
          {"Q", diag(p.Q)},
          {"R", diag(p.R)},
          {"dQ", diag(p.dQ)},
          {"K", diag(p.K)},
          {"output_bounds", bounds(p.output_bounds)},
          {"input_bounds", bounds(p.input_bounds)},
          {"u_nominal", std::vector<double>(p.u_nominal.data(), p.u_nominal.data() + 4)},
          {"sqp_max_iter", p.sqp_max_iter},
          {"kkt_tol", p.kkt_tol},
          {"constraint_tol", p.constraint_tol},
          {"height_margin", p.height_margin},
          {"height_activation_expand", p.height_activation_expand},
          {"dcbf_penalty_ratio", p.dcbf_penalty_ratio},
          {"soft_penalty_ratio", p.soft_penalty_ratio}};
}

Json to_json(const FitResult& r) {
  Json j = to_json(r.model);
  j["fit_percent"] = number_or_null(r.fit_percent);
  j["kstep_fit_percent"] = number_or_null(r.kstep_fit_percent);
  j["residual_norm"] = r.residual_norm;
  j["gradient_norm"] = r.gradient_norm;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const OrderSelection& s) {
  Json table = Json::array();
  for (const OrderCandidate& c : s.table) {
    table.push_back({{"poles", c.n_poles},
                     {"zeros", c.n_zeros},
                     {"fit_percent", number_or_null(c.fit_percent)},
                     {"converged", c.converged},
                     {"stable", c.stable}});
  }
  return {{"poles", s.n_poles}, {"zeros", s.n_zeros}, {"selected", to_json(s.selected)},
          {"table", table},     {"hsv", s.hsv},       {"warnings", s.warnings}};
}

Json to_json(const DecouplingReport& r) {
  return {{"source", channel_name(r.dim_m)},
          {"target", channel_name(r.dim_n)},
          {"fit_stage_percent", number_or_null(r.fit_stage_percent)},
          {"test_stage_percent", number_or_null(r.test_stage_percent)},
          {"drop", number_or_null(r.drop())},
          {"below_cutoff_percent", r.below_cutoff_percent ? number_or_null(*r.below_cutoff_percent) : Json()},
          {"verdict", to_string(r.verdict)},
          {"model", to_json(r.model)}};
}

Json to_json(const LinearityReport& r) {
  return {{"fit_below_percent", number_or_null(r.fit_below)},
          {"fit_above_percent", number_or_null(r.fit_above)},
          {"gap", number_or_null(r.gap())},
          {"split_time", r.split_time}};
}

Json to_json(const PlanResult& r, bool with_timing) {
  Json j{{"status", to_string(r.status)},
         {"cost", r.cost},
         {"sqp_iterations", r.sqp_iterations},
         {"qp_iterations", r.qp_iterations},
         {"kkt_residual", r.kkt_residual},
         {"dcbf_violation", r.dcbf_violation},
         {"soft_violation", r.soft_violation},
         {"terminal_slack", {r.delta(0), r.delta(1), r.delta(2)}},
         {"inputs", matrix_json(r.inputs)},
         {"outputs", matrix_json(r.outputs)},
         {"omega", std::vector<double>(r.omega.data(), r.omega.data() + r.omega.size())}};
  if (with_timing) j["solve_time_s"] = r.solve_time;
  return j;
}

Json to_json(const EpisodeLog& log, bool with_timing) {
  Json path = Json::array();
  for (const auto& w : log.global_path) path.push_back({w.x(), w.y()});
  Json ticks = Json::array();
  for (const ReplanTick& t : log.ticks) {
    Json tick{{"t", t.time},
              {"status", to_string(t.status)},
              {"accepted", t.accepted},
              {"sqp_iterations", t.sqp_iterations},
              {"target", pose_json(t.target)}};
    if (with_timing) tick["solve_time_s"] = t.solve_time;
    ticks.push_back(std::move(tick));
  }
  return {{"seed", log.seed},
          {"outcome", to_string(log.outcome)},
          {"diagnostic", log.diagnostic},
          {"start", pose_json(log.start)},
          {"global_path", path},
          {"final_time_s", log.final_time},
          {"min_clearance_m", number_or_null(log.min_clearance)},
          {"max_height_excess_m", number_or_null(log.max_height_excess)},
          {"ticks", ticks}};
}

EpisodeLog parse_episode_log(const Json& j, const Json* timing) {
  require_object(j, "episode");
  EpisodeLog log;
  std::string outcome = "timeout";
  read(j, "seed", log.seed);
  read(j, "outcome", outcome);
  log.outcome = outcome_from_string(outcome);
  read(j, "diagnostic", log.diagnostic);
  read(j, "final_time_s", log.final_time);
  log.min_clearance = std::numeric_limits<double>::infinity();
  if (j.contains("min_clearance_m") && !j["min_clearance_m"].is_null()) {
    read(j, "min_clearance_m", log.min_clearance);
  }
  log.max_height_excess = -std::numeric_limits<double>::infinity();
  if (j.contains("max_height_excess_m") && !j["max_height_excess_m"].is_null()) {
    read(j, "max_height_excess_m", log.max_height_excess);
  }
  if (j.contains("start")) log.start = parse_pose(j["start"], "start");
  if (j.contains("ticks")) {
    for (const Json& t : j["ticks"]) {
      ReplanTick tick;
      read(t, "t", tick.time);
      read(t, "accepted", tick.accepted);
      read(t, "sqp_iterations", tick.sqp_iterations);
      read(t, "solve_time_s", tick.solve_time);
      log.ticks.push_back(tick);
    }
  }
  if (timing != nullptr && timing->contains("solve_times_s")) {
    std::vector<double> times;
    read(*timing, "solve_times_s", times);
    if (times.size() != log.ticks.size()) {
      throw ValidationError("field 'solve_times_s': count differs from the episode's replans");
    }
    for (std::size_t k = 0; k < times.size(); ++k) log.ticks[k].solve_time = times[k];
  }
  return log;
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace clsid
