#include "clsid/planning/nmpc_problem.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "clsid/error.hpp"
#include "clsid/planning/kinematics.hpp"

namespace clsid {

namespace {

constexpr int kVx = 0, kVy = 1, kZ = 2, kWyaw = 3;

bool is_psd(const Eigen::MatrixXd& M) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff())) {
    return false;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.eigenvalues().minCoeff() >= -1e-12 * (1.0 + M.cwiseAbs().maxCoeff());
}

}  // namespace

void NmpcParams::validate() const {
  require(horizon >= 2, "N", "must be >= 2");
  require(dt > 0.0, "dt", "must be > 0");
  require(alpha > 0.0 && alpha <= 1.0, "alpha", "must be in (0, 1]");
  require(rho > 0.0, "rho", "must be > 0");
  require(is_psd(Q), "Q", "must be symmetric PSD");
  require(is_psd(R), "R", "must be symmetric PSD");
  require(is_psd(dQ), "dQ", "must be symmetric PSD");
  require(is_psd(K), "K", "must be symmetric PSD");
  for (int c = 0; c < 4; ++c) {
    require(output_bounds[c].lo < output_bounds[c].hi, "output_bounds", "need lo < hi");
    require(input_bounds[c].lo < input_bounds[c].hi, "input_bounds", "need lo < hi");
  }
  require(sqp_max_iter >= 1, "sqp_max_iter", "must be >= 1");
  require(kkt_tol > 0.0, "kkt_tol", "must be > 0");
  require(constraint_tol > 0.0, "constraint_tol", "must be > 0");
  require(height_margin >= 0.0, "height_margin", "must be >= 0");
  require(height_activation_expand >= 0.0, "height_activation_expand", "must be >= 0");
  require(dcbf_penalty_ratio > 0.0, "dcbf_penalty_ratio", "must be > 0");
  require(soft_penalty_ratio > 0.0, "soft_penalty_ratio", "must be > 0");
}

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Optimal: return "optimal";
    case PlanStatus::MaxIterations: return "max_iter";
    case PlanStatus::InfeasibleQp: return "infeasible_qp";
  }
  return "unknown";
}

Pose2 PlanResult::pose(int k) const {
  const auto n = states.cols() - 3;
  return {states(k, n), states(k, n + 1), states(k, n + 2)};
}

int NmpcProblem::equality_count() const {
  return step_size() * (horizon() + 1) + 3;
}

int NmpcProblem::inequality_count() const {
  const int N = horizon();
  int count = (N - 1) * static_cast<int>(scenario.obstacles.size());
  for (int k = 1; k <= N; ++k) {
    for (int c = 0; c < 4; ++c) count += 2;
    count += static_cast<int>(height_active[k].size());
  }
  count += 2 * 4 * N;  // input box
  count += N - 1;      // omega >= 0
  return count;
}

double NmpcProblem::cost(const Eigen::VectorXd& v) const {
  const int N = horizon();
  const int n = lti_states();
  const Eigen::MatrixXd& C = model.C();
  auto output = [&](int k) -> Eigen::Vector4d { return C * v.segment(state_offset(k), n); };
  double J = 0.0;
  for (int i = 0; i < N; ++i) {
    const Eigen::Vector4d du = v.segment<4>(input_offset(i)) - params.u_nominal;
    J += du.dot(params.R * du);
  }
  for (int i = 1; i <= N - 1; ++i) {
    const Eigen::Vector4d dy = output(i) - output_equilibrium;
    const Eigen::Vector4d inc = output(i + 1) - output(i);
    const double w = 1.0 - v(omega_offset(i));
    J += dy.dot(params.Q * dy) + inc.dot(params.dQ * inc) + params.rho * w * w;
  }
  const Eigen::Vector3d delta = v.segment<3>(delta_offset());
  J += delta.dot(params.K * delta);
  return J;
}

Eigen::VectorXd NmpcProblem::equalities(const Eigen::VectorXd& v, Eigen::MatrixXd* jac) const {
  const int N = horizon();
  const int n = lti_states();
  const int ns = step_size();
  Eigen::VectorXd g(equality_count());
  if (jac) jac->setZero(equality_count(), variable_count());
  const Eigen::MatrixXd& A = model.A();
  const Eigen::MatrixXd& B = model.B();
  const Eigen::MatrixXd& C = model.C();

  // x_0 = x_init, pose_0 = pose_init.
  g.head(n) = v.head(n) - x_init;
  g(n) = v(n) - pose_init.x;
  g(n + 1) = v(n + 1) - pose_init.y;
  g(n + 2) = v(n + 2) - pose_init.yaw;
  if (jac) jac->block(0, 0, ns, ns).setIdentity();

  for (int k = 0; k < N; ++k) {
    const int row = ns * (k + 1);
    const int xk = state_offset(k), xk1 = state_offset(k + 1), uk = input_offset(k);
    g.segment(row, n) = v.segment(xk1, n) - A * v.segment(xk, n) - B * v.segment<4>(uk);
    const Eigen::Vector4d o = C * v.segment(xk, n);
    const Pose2 p{v(xk + n), v(xk + n + 1), v(xk + n + 2)};
    const Pose2 next = rollout_kinematics(p, o(kVx), o(kVy), o(kWyaw), params.dt);
    g(row + n) = v(xk1 + n) - next.x;
    g(row + n + 1) = v(xk1 + n + 1) - next.y;
    g(row + n + 2) = v(xk1 + n + 2) - next.yaw;
    if (jac) {
      auto& J = *jac;
      J.block(row, xk1, n, n).setIdentity();
      J.block(row, xk, n, n) = -A;
      J.block(row, uk, n, 4) = -B;
      const auto Jk = rollout_jacobian(p, o(kVx), o(kVy), params.dt);
      J.block(row + n, xk1 + n, 3, 3).setIdentity();
      J.block(row + n, xk + n, 3, 3) = -Jk.leftCols<3>();
      // Pose depends on x_k through (vx, vy, wyaw) = rows 0, 1, 3 of C.
      Eigen::Matrix<double, 3, Eigen::Dynamic> Cv(3, n);
      Cv.row(0) = C.row(kVx);
      Cv.row(1) = C.row(kVy);
      Cv.row(2) = C.row(kWyaw);
      J.block(row + n, xk, 3, n) = -Jk.rightCols<3>() * Cv;
    }
  }
  const int row = ns * (N + 1);
  const int xN = state_offset(N) + n;
  g(row) = v(xN) - target.x - v(delta_offset());
  g(row + 1) = v(xN + 1) - target.y - v(delta_offset() + 1);
  g(row + 2) = v(xN + 2) - target.yaw - v(delta_offset() + 2);
  if (jac) {
    jac->block(row, xN, 3, 3).setIdentity();
    jac->block(row, delta_offset(), 3, 3) = -Eigen::Matrix3d::Identity();
  }
  return g;
}

Eigen::VectorXd NmpcProblem::inequalities(const Eigen::VectorXd& v, Eigen::MatrixXd* jac) const {
  const int N = horizon();
  const int n = lti_states();
  const int m = inequality_count();
  Eigen::VectorXd h(m);
  if (jac) jac->setZero(m, variable_count());
  const Eigen::MatrixXd& C = model.C();
  const double radius = scenario.planning_radius();
  int row = 0;

  auto pos = [&](int k) { return Eigen::Vector2d(v(state_offset(k) + n), v(state_offset(k) + n + 1)); };
  for (int k = 1; k <= N - 1; ++k) {
    const double w = v(omega_offset(k));
    for (const auto& obs : scenario.obstacles) {
      const Eigen::Vector2d p0 = pos(k), p1 = pos(k + 1);
      const double d0 = obstacle_distance(p0.x(), p0.y(), obs, radius);
      const double d1 = obstacle_distance(p1.x(), p1.y(), obs, radius);
      h(row) = d1 - w * params.alpha * d0;
      if (jac) {
        jac->block<1, 2>(row, state_offset(k + 1) + n) =
            obstacle_distance_gradient(p1.x(), p1.y(), obs).transpose();
        jac->block<1, 2>(row, state_offset(k) + n) =
            -w * params.alpha * obstacle_distance_gradient(p0.x(), p0.y(), obs).transpose();
        (*jac)(row, omega_offset(k)) = -params.alpha * d0;
      }
      ++row;
    }
  }
  for (int k = 1; k <= N; ++k) {
    const Eigen::Vector4d o = C * v.segment(state_offset(k), n);
    for (int c = 0; c < 4; ++c) {
      h(row) = o(c) - params.output_bounds[c].lo;
      h(row + 1) = params.output_bounds[c].hi - o(c);
      if (jac) {
        jac->block(row, state_offset(k), 1, n) = C.row(c);
        jac->block(row + 1, state_offset(k), 1, n) = -C.row(c);
      }
      row += 2;
    }
    for (int r : height_active[k]) {
      h(row) = scenario.height_regions[r].hmax - params.height_margin - o(kZ);
      if (jac) jac->block(row, state_offset(k), 1, n) = -C.row(kZ);
      ++row;
    }
  }
  for (int k = 0; k < N; ++k) {
    for (int c = 0; c < 4; ++c) {
      const int idx = input_offset(k) + c;
      h(row) = v(idx) - params.input_bounds[c].lo;
      h(row + 1) = params.input_bounds[c].hi - v(idx);
      if (jac) {
        (*jac)(row, idx) = 1.0;
        (*jac)(row + 1, idx) = -1.0;
      }
      row += 2;
    }
  }
  for (int k = 1; k <= N - 1; ++k) {
    h(row) = v(omega_offset(k));
    if (jac) (*jac)(row, omega_offset(k)) = 1.0;
    ++row;
  }
  return h;
}

std::vector<std::string> NmpcProblem::inequality_labels() const {
  const int N = horizon();
  std::vector<std::string> out;
  for (int k = 1; k <= N - 1; ++k) {
    for (std::size_t i = 0; i < scenario.obstacles.size(); ++i) {
      out.push_back(fmt::format("dcbf[k={},obs={}]", k, i));
    }
  }
  static const char* names[] = {"vx", "vy", "z", "wyaw"};
  for (int k = 1; k <= N; ++k) {
    for (int c = 0; c < 4; ++c) {
      out.push_back(fmt::format("output_lo[k={},{}]", k, names[c]));
      out.push_back(fmt::format("output_hi[k={},{}]", k, names[c]));
    }
    for (int r : height_active[k]) out.push_back(fmt::format("height[k={},region={}]", k, r));
  }
  for (int k = 0; k < N; ++k) {
    for (int c = 0; c < 4; ++c) {
      out.push_back(fmt::format("input_lo[k={},{}]", k, names[c]));
      out.push_back(fmt::format("input_hi[k={},{}]", k, names[c]));
    }
  }
  for (int k = 1; k <= N - 1; ++k) out.push_back(fmt::format("omega[k={}]", k));
  return out;
}

Eigen::VectorXd NmpcProblem::pack(const PlanResult& plan) const {
  const int N = horizon();
  require(plan.states.rows() == N + 1 && plan.states.cols() == step_size(), "plan",
          "state trajectory does not match the problem");
  require(plan.inputs.rows() == N && plan.inputs.cols() == 4, "plan",
          "input trajectory does not match the problem");
  require(plan.omega.size() == N - 1, "plan", "omega length does not match the problem");
  Eigen::VectorXd v(variable_count());
  for (int k = 0; k <= N; ++k) v.segment(state_offset(k), step_size()) = plan.states.row(k).transpose();
  for (int k = 0; k < N; ++k) v.segment<4>(input_offset(k)) = plan.inputs.row(k).transpose();
  for (int k = 1; k <= N - 1; ++k) v(omega_offset(k)) = plan.omega(k - 1);
  v.segment<3>(delta_offset()) = plan.delta;
  return v;
}

std::vector<std::vector<int>> NmpcProblem::activation_for(const std::vector<Pose2>& poses) const {
  std::vector<std::vector<int>> out(poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    for (std::size_t r = 0; r < scenario.height_regions.size(); ++r) {
      if (scenario.height_regions[r].contains(poses[k].x, poses[k].y,
                                              params.height_activation_expand)) {
        out[k].push_back(static_cast<int>(r));
      }
    }
  }
  return out;
}

NmpcProblem build_problem(const Scenario& scenario, const StateSpaceModel& model,
                          const NmpcParams& params, const Eigen::VectorXd& x_init,
                          const Pose2& pose_init, const Pose2& target) {
  scenario.validate_geometry();
  params.validate();
  if (!model.is_discrete() || std::abs(*model.dt() - params.dt) > 1e-12 * params.dt) {
    throw ValidationError("model: must be discrete with sample period dt = " +
                          std::to_string(params.dt));
  }
  if (model.inputs() != 4 || model.outputs() != 4) {
    throw StructuralError("model: needs 4 inputs and 4 outputs (vx, vy, z, wyaw)");
  }
  if (!model.D().isZero(0.0)) throw StructuralError("model: must have no direct feedthrough");
  if (x_init.size() != model.states()) {
    throw ValidationError("x_init: expected " + std::to_string(model.states()) + " states, got " +
                          std::to_string(x_init.size()));
  }

  NmpcProblem p{scenario, model, params, x_init, pose_init, target, {}, {}, {}};
  p.target.yaw = pose_init.yaw + wrap_angle(target.yaw - pose_init.yaw);
  p.x_equilibrium = model.equilibrium(params.u_nominal);
  p.output_equilibrium = model.C() * p.x_equilibrium;

  // Hold-nominal rollout for the initial height activation.
  std::vector<Pose2> poses{pose_init};
  Eigen::VectorXd x = x_init;
  for (int k = 0; k < params.horizon; ++k) {
    const Eigen::Vector4d o = model.C() * x;
    poses.push_back(rollout_kinematics(poses.back(), o(kVx), o(kVy), o(kWyaw), params.dt));
    x = model.A() * x + model.B() * params.u_nominal;
  }
  p.height_active = p.activation_for(poses);
  return p;
}

NmpcProblem build_problem(const Scenario& scenario, const StateSpaceModel& model,
                          const NmpcParams& params, const Eigen::VectorXd& x_init,
                          const Pose2& pose_init) {
  return build_problem(scenario, model, params, x_init, pose_init, scenario.goal);
}

void write_plan_csv(std::ostream& os, const PlanResult& plan, double dt) {
  const int N = plan.horizon();
  const auto obstacles = plan.distances.cols();
  os << "k,t,x,y,yaw,y_vx,y_vy,y_z,y_wyaw,u_vx,u_vy,u_z,u_wyaw,omega";
  for (Eigen::Index i = 0; i < obstacles; ++i) os << ",d_" << i;
  os << '\n';
  for (int k = 0; k <= N; ++k) {
    const Pose2 p = plan.pose(k);
    os << fmt::format("{},{:.6f},{:.10g},{:.10g},{:.10g}", k, k * dt, p.x, p.y, p.yaw);
    for (int c = 0; c < 4; ++c) os << fmt::format(",{:.10g}", plan.outputs(k, c));
    for (int c = 0; c < 4; ++c) {
      if (k < N) {
        os << fmt::format(",{:.10g}", plan.inputs(k, c));
      } else {
        os << ',';
      }
    }
    if (k >= 1 && k <= N - 1) {
      os << fmt::format(",{:.10g}", plan.omega(k - 1));
    } else {
      os << ',';
    }
    for (Eigen::Index i = 0; i < obstacles; ++i) os << fmt::format(",{:.10g}", plan.distances(k, i));
    os << '\n';
  }
}

}  // namespace clsid
