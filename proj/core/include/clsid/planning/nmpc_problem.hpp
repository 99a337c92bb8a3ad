#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clsid/lti/state_space.hpp"
#include "clsid/planning/scenario.hpp"
#include "clsid/signals/signal.hpp"

namespace clsid {

/// Weights act on the model outputs (vx, vy, z, wyaw): the running state
/// cost is ||C x_i - y_eq||_Q, i.e. the state weight is C^T Q C.
struct NmpcParams {
  int horizon = 20;
  double dt = 0.1;
  double alpha = 0.9;
  double rho = 1e3;
  Eigen::Matrix4d Q = Eigen::Vector4d(0.1, 0.1, 1.0, 0.1).asDiagonal();
  Eigen::Matrix4d R = Eigen::Vector4d(0.1, 0.2, 1.0, 0.1).asDiagonal();
  Eigen::Matrix4d dQ = Eigen::Vector4d(0.5, 0.5, 0.5, 0.5).asDiagonal();
  Eigen::Matrix3d K = Eigen::Vector3d(10.0, 10.0, 1.0).asDiagonal();
  /// Admissible model outputs (X_adm) and commands (U_adm).
  std::array<Interval, 4> output_bounds{Interval{-0.5, 1.0}, Interval{-0.3, 0.3},
                                        Interval{0.65, 1.0}, Interval{-0.5, 0.5}};
  std::array<Interval, 4> input_bounds{Interval{-0.5, 1.0}, Interval{-0.3, 0.3},
                                       Interval{0.65, 1.0}, Interval{-0.5, 0.5}};
  Eigen::Vector4d u_nominal{0.0, 0.0, 0.98, 0.0};
  int sqp_max_iter = 15;
  double kkt_tol = 1e-5;
  double constraint_tol = 1e-5;
  double height_margin = 0.02;
  double height_activation_expand = 0.3;
  /// Elastic penalties on DCBF rows and on output/height rows, as multiples of rho.
  double dcbf_penalty_ratio = 1e2;
  double soft_penalty_ratio = 1.0;

  void validate() const;
};

enum class PlanStatus { Optimal, MaxIterations, InfeasibleQp };
const char* to_string(PlanStatus s);

struct PlanResult {
  /// Row k: LTI state x_k followed by pose (x, y, yaw), k = 0..N.
  Eigen::MatrixXd states;
  /// Row k: model outputs C x_k.
  Eigen::MatrixXd outputs;
  /// Row k: command u_k, k = 0..N-1.
  Eigen::MatrixXd inputs;
  /// Decay relaxations omega_1..omega_{N-1}.
  Eigen::VectorXd omega;
  Eigen::Vector3d delta = Eigen::Vector3d::Zero();
  /// Row k, column i: separation of obstacle i at step k (planning radius).
  Eigen::MatrixXd distances;
  /// Height regions enforced at each step.
  std::vector<std::vector<int>> height_active;
  double cost = 0.0;
  int sqp_iterations = 0;
  int qp_iterations = 0;
  PlanStatus status = PlanStatus::MaxIterations;
  double kkt_residual = 0.0;
  double dcbf_violation = 0.0;
  double soft_violation = 0.0;
  double solve_time = 0.0;

  int horizon() const { return static_cast<int>(inputs.rows()); }
  Pose2 pose(int k) const;
};

/// Full-space nonlinear program of one planning step. Variables are ordered
/// [x_0 .. x_N (LTI state + pose) | u_0 .. u_{N-1} | omega_1 .. omega_{N-1} | delta].
struct NmpcProblem {
  Scenario scenario;
  StateSpaceModel model;
  NmpcParams params;
  Eigen::VectorXd x_init;
  Pose2 pose_init;
  /// Terminal target; yaw unwrapped to lie within pi of pose_init.yaw.
  Pose2 target;
  Eigen::VectorXd x_equilibrium;
  Eigen::Vector4d output_equilibrium;
  std::vector<std::vector<int>> height_active;

  int horizon() const { return params.horizon; }
  int lti_states() const { return model.states(); }
  int step_size() const { return model.states() + 3; }
  int state_offset(int k) const { return k * step_size(); }
  int input_offset(int k) const { return (horizon() + 1) * step_size() + 4 * k; }
  /// Index of omega_k, k = 1..N-1.
  int omega_offset(int k) const { return input_offset(horizon()) + (k - 1); }
  int delta_offset() const { return omega_offset(horizon()); }
  int variable_count() const { return delta_offset() + 3; }

  int equality_count() const;
  int inequality_count() const;

  /// Equation (8) cost.
  double cost(const Eigen::VectorXd& v) const;
  /// Initial condition, dynamics, kinematics and terminal rows (all == 0).
  Eigen::VectorXd equalities(const Eigen::VectorXd& v, Eigen::MatrixXd* jacobian = nullptr) const;
  /// DCBF, output box, height, input box and omega >= 0 rows (all >= 0).
  Eigen::VectorXd inequalities(const Eigen::VectorXd& v,
                               Eigen::MatrixXd* jacobian = nullptr) const;
  std::vector<std::string> inequality_labels() const;

  Eigen::VectorXd pack(const PlanResult& plan) const;

  /// Recomputes the height activation from predicted poses (k = 0..N).
  std::vector<std::vector<int>> activation_for(const std::vector<Pose2>& poses) const;
};

/// Assembles the program for @p model (discrete, 4 inputs, 4 outputs,
/// sample period params.dt) from LTI state @p x_init and pose @p pose_init
/// toward @p target. Height activation starts from a hold-nominal rollout.
NmpcProblem build_problem(const Scenario& scenario, const StateSpaceModel& model,
                          const NmpcParams& params, const Eigen::VectorXd& x_init,
                          const Pose2& pose_init, const Pose2& target);

/// Same with the scenario goal as target.
NmpcProblem build_problem(const Scenario& scenario, const StateSpaceModel& model,
                          const NmpcParams& params, const Eigen::VectorXd& x_init,
                          const Pose2& pose_init);

/// One row per horizon step: k,t,x,y,yaw,y_vx,y_vy,y_z,y_wyaw,u_vx,u_vy,u_z,u_wyaw,omega,d_0..
void write_plan_csv(std::ostream& os, const PlanResult& plan, double dt);

}  // namespace clsid
