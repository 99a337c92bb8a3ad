#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "clsid/error.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/nav/episode.hpp"
#include "clsid/planning/kinematics.hpp"
#include "clsid/planning/nmpc_problem.hpp"
#include "clsid/planning/qp_solver.hpp"
#include "clsid/planning/sqp_solver.hpp"
#include "clsid/plant/profile.hpp"
#include "generators.hpp"

namespace clsid {
namespace {

using testing::Gen;
constexpr double kInf = std::numeric_limits<double>::infinity();

StateSpaceModel bare_model(double dt = 0.1) {
  std::vector<StateSpaceModel> blocks;
  for (const auto& tf : nominal_core()) blocks.push_back(tf_to_ss_ccf(tf));
  return c2d_zoh(block_diagonal(blocks), dt);
}

Scenario open_field(Pose2 goal) {
  Scenario sc;
  sc.goal = goal;
  return sc;
}

TEST(ObstacleDistance, Examples) {
  EXPECT_DOUBLE_EQ(obstacle_distance(0.0, 0.0, {3.0, 4.0, 0.6}, 0.4), 24.0);
  EXPECT_DOUBLE_EQ(obstacle_distance(1.0, 0.0, {2.0, 0.0, 0.5}, 0.5), 0.0);
  const Eigen::Vector2d g = obstacle_distance_gradient(0.0, 0.0, {3.0, 4.0, 0.6});
  EXPECT_DOUBLE_EQ(g.x(), -6.0);
  EXPECT_DOUBLE_EQ(g.y(), -8.0);
  EXPECT_DOUBLE_EQ(clearance(0.0, 0.0, {3.0, 4.0, 0.6}, 0.4), 4.0);
}

TEST(Kinematics, Examples) {
  Pose2 p = rollout_kinematics({0.0, 0.0, 0.0}, 1.0, 0.0, 0.0, 0.1);
  EXPECT_NEAR(p.x, 0.1, 1e-15);
  EXPECT_NEAR(p.y, 0.0, 1e-15);
  p = rollout_kinematics({0.0, 0.0, M_PI / 2}, 1.0, 0.0, 0.0, 0.1);
  EXPECT_NEAR(p.x, 0.0, 1e-15);
  EXPECT_NEAR(p.y, 0.1, 1e-15);
  p = rollout_kinematics({1.0, 2.0, 0.3}, 0.0, 0.0, 0.5, 0.1);
  EXPECT_DOUBLE_EQ(p.x, 1.0);
  EXPECT_DOUBLE_EQ(p.y, 2.0);
  EXPECT_NEAR(p.yaw, 0.35, 1e-15);
  // Lateral velocity moves left of the heading.
  p = rollout_kinematics({0.0, 0.0, 0.0}, 0.0, 1.0, 0.0, 0.1);
  EXPECT_NEAR(p.y, 0.1, 1e-15);
}

TEST(Kinematics, JacobianMatchesFiniteDifferences) {
  Gen g(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose2 pose{g.normal(), g.normal(), g.uniform(-M_PI, M_PI)};
    const double vx = g.normal(), vy = g.normal(), w = g.normal(), dt = 0.1;
    const auto J = rollout_jacobian(pose, vx, vy, dt);
    const double h = 1e-6;
    Eigen::Matrix<double, 6, 1> z;
    z << pose.x, pose.y, pose.yaw, vx, vy, w;
    for (int i = 0; i < 6; ++i) {
      auto eval = [&](double s) {
        Eigen::Matrix<double, 6, 1> q = z;
        q(i) += s;
        const Pose2 r = rollout_kinematics({q(0), q(1), q(2)}, q(3), q(4), q(5), dt);
        return Eigen::Vector3d(r.x, r.y, r.yaw);
      };
      const Eigen::Vector3d fd = (eval(h) - eval(-h)) / (2 * h);
      EXPECT_LT((J.col(i) - fd).norm(), 1e-8);
    }
  }
}

TEST(Kinematics, WrapAngle) {
  EXPECT_NEAR(wrap_angle(3.0 * M_PI), M_PI, 1e-12);
  EXPECT_NEAR(wrap_angle(-M_PI / 2), -M_PI / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(2.0 * M_PI + 0.1), 0.1, 1e-12);
}

TEST(NmpcProblem, VariableCounts) {
  Scenario sc = open_field({5.0, 0.0, 0.0});
  sc.obstacles = {{2.0, 1.5, 0.3}, {3.0, -1.5, 0.3}};
  const auto model = bare_model();
  NmpcParams params;
  const auto prob = build_problem(sc, model, params, model.equilibrium(params.u_nominal), {});
  EXPECT_EQ(prob.step_size(), 15);
  EXPECT_EQ(prob.input_offset(0), 15 * 21);
  EXPECT_EQ(prob.omega_offset(1), 15 * 21 + 80);
  EXPECT_EQ(prob.delta_offset(), 15 * 21 + 80 + 19);
  EXPECT_EQ(prob.variable_count(), 15 * 21 + 80 + 19 + 3);
  // Initial condition, dynamics and kinematics per step, terminal.
  EXPECT_EQ(prob.equality_count(), 15 + 20 * 15 + 3);

  Scenario empty = sc;
  empty.obstacles.clear();
  const auto bare = build_problem(empty, model, params, model.equilibrium(params.u_nominal), {});
  EXPECT_EQ(prob.inequality_count() - bare.inequality_count(), 2 * 19);
  for (const auto& label : bare.inequality_labels()) EXPECT_EQ(label.find("dcbf"), std::string::npos);
}

TEST(NmpcProblem, UnitRelaxationGivesPlainDecay) {
  Scenario sc = open_field({5.0, 0.0, 0.0});
  sc.obstacles = {{2.0, 0.5, 0.3}};
  const auto model = bare_model();
  NmpcParams params;
  const auto prob = build_problem(sc, model, params, model.equilibrium(params.u_nominal), {});
  Gen g(6);
  Eigen::VectorXd v = 0.3 * g.vector(prob.variable_count());
  for (int k = 1; k < prob.horizon(); ++k) v(prob.omega_offset(k)) = 1.0;
  const Eigen::VectorXd h = prob.inequalities(v);
  const int n = prob.lti_states();
  for (int k = 1; k < prob.horizon(); ++k) {
    auto d = [&](int j) {
      return obstacle_distance(v(prob.state_offset(j) + n), v(prob.state_offset(j) + n + 1),
                               sc.obstacles[0], sc.planning_radius());
    };
    EXPECT_NEAR(h(k - 1), d(k + 1) - params.alpha * d(k), 1e-12);
  }
  // The relaxation term of the cost vanishes.
  Eigen::VectorXd w = v;
  for (int k = 1; k < prob.horizon(); ++k) w(prob.omega_offset(k)) = 0.5;
  EXPECT_LT(prob.cost(v), prob.cost(w));
}

TEST(NmpcProblem, RejectsWrongInitialState) {
  const auto model = bare_model();
  EXPECT_THROW(build_problem(open_field({1, 0, 0}), model, {}, Eigen::VectorXd::Zero(5), {}),
               ValidationError);
  NmpcParams bad;
  bad.alpha = 1.5;
  EXPECT_THROW(bad.validate(), ValidationError);
}

void check_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, Eigen::MatrixXd*)>& f,
                    const Eigen::VectorXd& v) {
  Eigen::MatrixXd J;
  f(v, &J);
  Eigen::MatrixXd fd(J.rows(), J.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(v(i)));
    Eigen::VectorXd p = v, m = v;
    p(i) += h;
    m(i) -= h;
    fd.col(i) = (f(p, nullptr) - f(m, nullptr)) / (2 * h);
  }
  const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
  EXPECT_LE((J - fd).cwiseAbs().maxCoeff(), 1e-5 * scale);
}

TEST(NmpcProblem, JacobiansMatchFiniteDifferences) {
  Gen g(7);
  const auto model = planner_model(nominal_core(), 0.5, 0.1);
  NmpcParams params;
  params.horizon = 8;
  for (int trial = 0; trial < 20; ++trial) {
    Scenario sc = open_field({g.uniform(2, 6), g.uniform(-1, 1), g.uniform(-1, 1)});
    sc.obstacles = {{g.uniform(1, 3), g.uniform(-1, 1), g.uniform(0.2, 0.5)},
                    {g.uniform(1, 3), g.uniform(-1, 1), g.uniform(0.2, 0.5)}};
    sc.height_regions = {{0.0, 2.0, -1.0, 1.0, 0.8}};
    const auto prob = build_problem(sc, model, params, model.equilibrium(params.u_nominal), {});
    const Eigen::VectorXd v = g.vector(prob.variable_count());
    check_jacobian([&](const Eigen::VectorXd& x, Eigen::MatrixXd* J) { return prob.equalities(x, J); }, v);
    check_jacobian([&](const Eigen::VectorXd& x, Eigen::MatrixXd* J) { return prob.inequalities(x, J); },
                   v);
  }
}

// Independent re-check of a returned trajectory against the model.
struct Audit {
  double dynamics = 0.0;
  double min_distance = kInf;
  double dcbf = 0.0;
  double min_omega = kInf;
  double input_excess = 0.0;
};

Audit audit(const NmpcProblem& prob, const PlanResult& r) {
  Audit a;
  const int n = prob.lti_states(), N = prob.horizon();
  const double R = prob.scenario.planning_radius();
  auto dist = [&](int k, const Obstacle& o) {
    const double dx = r.states(k, n) - o.x, dy = r.states(k, n + 1) - o.y;
    return dx * dx + dy * dy - (R + o.r) * (R + o.r);
  };
  a.dynamics = (r.states.row(0).head(n).transpose() - prob.x_init).cwiseAbs().maxCoeff();
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd x = r.states.row(k).head(n).transpose();
    const Eigen::VectorXd u = r.inputs.row(k).transpose();
    const Eigen::VectorXd next = prob.model.A() * x + prob.model.B() * u;
    a.dynamics = std::max(a.dynamics, (next - r.states.row(k + 1).head(n).transpose()).cwiseAbs().maxCoeff());
    const Eigen::Vector4d y = prob.model.C() * x;
    const double yaw = r.states(k, n + 2);
    const double px = r.states(k, n) + (y(0) * std::cos(yaw) - y(1) * std::sin(yaw)) * prob.params.dt;
    const double py = r.states(k, n + 1) + (y(0) * std::sin(yaw) + y(1) * std::cos(yaw)) * prob.params.dt;
    const double pyaw = yaw + y(3) * prob.params.dt;
    a.dynamics = std::max({a.dynamics, std::abs(px - r.states(k + 1, n)),
                           std::abs(py - r.states(k + 1, n + 1)), std::abs(pyaw - r.states(k + 1, n + 2))});
    for (int c = 0; c < 4; ++c) {
      const auto& b = prob.params.input_bounds[c];
      a.input_excess = std::max({a.input_excess, b.lo - u(c), u(c) - b.hi});
    }
  }
  for (const auto& o : prob.scenario.obstacles) {
    for (int k = 1; k <= N; ++k) a.min_distance = std::min(a.min_distance, dist(k, o));
    for (int k = 1; k < N; ++k) {
      a.dcbf = std::max(a.dcbf, r.omega(k - 1) * prob.params.alpha * dist(k, o) - dist(k + 1, o));
    }
  }
  for (int k = 0; k < r.omega.size(); ++k) a.min_omega = std::min(a.min_omega, r.omega(k));
  return a;
}

class SqpTest : public ::testing::Test {
 protected:
  StateSpaceModel model = planner_model(nominal_core(), 0.5, 0.1);
  NmpcParams params;
  Eigen::VectorXd x0 = model.equilibrium(params.u_nominal);
};

TEST_F(SqpTest, StraightLine) {
  // A goal reachable within the two-second horizon.
  Eigen::Vector4d cruise = params.u_nominal;
  cruise(0) = 1.0;
  const auto prob = build_problem(open_field({1.0, 0.0, 0.0}), model, params, model.equilibrium(cruise), {});
  const auto r = solve(prob);
  EXPECT_EQ(r.status, PlanStatus::Optimal);
  EXPECT_LT(r.delta.norm(), 0.05);
  const Audit a = audit(prob, r);
  EXPECT_LE(a.input_excess, 1e-9);
  EXPECT_LE(a.dynamics, 1e-9);
}

TEST_F(SqpTest, SingleBlockingObstacle) {
  Scenario sc = open_field({3.0, 0.0, 0.0});
  sc.obstacles = {{1.6, 0.05, 0.3}};
  const auto prob = build_problem(sc, model, params, x0, {});
  const auto r = solve(prob);
  ASSERT_EQ(r.status, PlanStatus::Optimal);
  const Audit a = audit(prob, r);
  EXPECT_GT(a.min_distance, 0.0);
  EXPECT_LE(a.dcbf, params.constraint_tol);
  EXPECT_GE(a.min_omega, -1e-9);
  // Chained decay bound from the first predicted separation.
  const double d1 = r.distances(1, 0);
  double prod = 1.0;
  for (int k = 2; k <= prob.horizon(); ++k) {
    prod *= r.omega(k - 2) * params.alpha;
    EXPECT_GE(r.distances(k, 0), d1 * prod - k * params.constraint_tol);
  }
}

TEST_F(SqpTest, GoalInsideObstacleAbsorbedBySlack) {
  Scenario sc = open_field({2.0, 0.0, 0.0});
  sc.obstacles = {{2.0, 0.0, 0.4}};
  const auto prob = build_problem(sc, model, params, x0, {});
  const auto r = solve(prob);
  EXPECT_EQ(r.status, PlanStatus::Optimal);
  EXPECT_GT(r.delta.head<2>().norm(), 0.5);
  EXPECT_GE(audit(prob, r).min_distance, -params.constraint_tol);
}

TEST_F(SqpTest, ScalingWeightsKeepsSolution) {
  Scenario sc = open_field({2.5, 0.5, 0.2});
  sc.obstacles = {{1.2, 0.3, 0.2}};
  const auto prob = build_problem(sc, model, params, x0, {});
  NmpcParams scaled = params;
  const double f = 3.0;
  scaled.Q *= f;
  scaled.R *= f;
  scaled.dQ *= f;
  scaled.K *= f;
  scaled.rho *= f;
  const auto prob2 = build_problem(sc, model, scaled, x0, {});
  const auto a = solve(prob);
  const auto b = solve(prob2);
  ASSERT_EQ(a.status, PlanStatus::Optimal);
  ASSERT_EQ(b.status, PlanStatus::Optimal);
  EXPECT_LT((a.inputs - b.inputs).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_NEAR(b.cost, f * a.cost, 1e-3 * std::abs(f * a.cost));
}

TEST_F(SqpTest, WarmStartNoWorseThanCold) {
  Scenario sc = arch_scenario();
  const auto prob = build_problem(sc, model, params, x0, {1.5, 0.2, 0.05});
  const auto cold = solve(prob);
  SolveOptions opt;
  opt.warm_start_shift = 0;
  const auto warm = solve(prob, &cold, opt);
  EXPECT_LE(warm.cost, cold.cost + params.kkt_tol);
}

TEST_F(SqpTest, HeightRegionRespected) {
  Scenario sc = open_field({3.0, 0.0, 0.0});
  sc.height_regions = {{1.0, 2.0, -1.0, 1.0, 0.8}};
  const auto prob = build_problem(sc, model, params, x0, {0.5, 0.0, 0.0});
  const auto r = solve(prob);
  ASSERT_NE(r.status, PlanStatus::InfeasibleQp);
  for (int k = 0; k <= prob.horizon(); ++k) {
    if (sc.height_regions[0].contains(r.states(k, prob.lti_states()), r.states(k, prob.lti_states() + 1))) {
      EXPECT_LE(r.outputs(k, 2), 0.8 - params.height_margin + 1e-4);
    }
  }
}

// Brute-force oracle: enumerate active sets of a tiny QP and keep the best
// feasible KKT point.
double brute_force_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                      const Eigen::VectorXd& h) {
  const int n = static_cast<int>(c.size()), m = static_cast<int>(h.size());
  double best = kInf;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i) {
      if (mask & (1 << i)) act.push_back(i);
    }
    const int a = static_cast<int>(act.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + a, n + a);
    Eigen::VectorXd rhs(n + a);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -c;
    for (int j = 0; j < a; ++j) {
      K.block(0, n + j, n, 1) = G.row(act[j]).transpose();
      K.block(n + j, 0, 1, n) = G.row(act[j]);
      rhs(n + j) = h(act[j]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd s = lu.solve(rhs);
    const Eigen::VectorXd x = s.head(n);
    if (((G * x - h).array() < -1e-9).any()) continue;
    best = std::min(best, 0.5 * x.dot(H * x) + c.dot(x));
  }
  return best;
}

TEST(QpSolver, MatchesActiveSetEnumeration) {
  Gen g(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = g.integer(2, 4), rows = g.integer(1, 3);
    DenseQp qp;
    qp.H = g.psd(n) + 0.1 * Eigen::MatrixXd::Identity(n, n);
    qp.c = g.vector(n);
    qp.A = g.matrix(rows, n);
    qp.row_lower = Eigen::VectorXd::Constant(rows, -kInf);
    qp.row_upper = g.vector(rows).cwiseAbs() + Eigen::VectorXd::Constant(rows, 0.1);
    qp.row_penalty = Eigen::VectorXd::Constant(rows, kInf);
    qp.lower = Eigen::VectorXd::Constant(n, -1.0);
    qp.upper = Eigen::VectorXd::Constant(n, 1.0);
    const auto sol = solve_qp(qp);
    ASSERT_EQ(sol.status, QpStatus::Solved) << trial;
    // All constraints as G x >= h.
    Eigen::MatrixXd G(rows + 2 * n, n);
    Eigen::VectorXd h(rows + 2 * n);
    G << -qp.A, Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
    h << -qp.row_upper, qp.lower, -qp.upper;
    const double oracle = brute_force_qp(qp.H, qp.c, G, h);
    EXPECT_NEAR(sol.objective, oracle, 1e-6 * std::max(1.0, std::abs(oracle))) << trial;
    EXPECT_GE((G * sol.x - h).minCoeff(), -1e-7);
  }
}

TEST(QpSolver, KktConditions) {
  Gen g(12);
  const int n = 6, rows = 4;
  DenseQp qp;
  qp.H = g.psd(n) + 0.01 * Eigen::MatrixXd::Identity(n, n);
  qp.c = 3.0 * g.vector(n);
  qp.A = g.matrix(rows, n);
  qp.row_lower = Eigen::VectorXd::Constant(rows, -0.5);
  qp.row_upper = Eigen::VectorXd::Constant(rows, 0.5);
  qp.row_penalty = Eigen::VectorXd::Constant(rows, kInf);
  qp.lower = Eigen::VectorXd::Constant(n, -2.0);
  qp.upper = Eigen::VectorXd::Constant(n, 2.0);
  const auto sol = solve_qp(qp);
  ASSERT_EQ(sol.status, QpStatus::Solved);
  const Eigen::VectorXd stat =
      qp.H * sol.x + qp.c - qp.A.transpose() * sol.row_multipliers - sol.bound_multipliers;
  EXPECT_LT(stat.cwiseAbs().maxCoeff(), 1e-6);
  const Eigen::VectorXd ax = qp.A * sol.x;
  for (int i = 0; i < rows; ++i) {
    const double lam = sol.row_multipliers(i);
    if (lam > 1e-6) {
      EXPECT_NEAR(ax(i), qp.row_lower(i), 1e-6);
    }
    if (lam < -1e-6) {
      EXPECT_NEAR(ax(i), qp.row_upper(i), 1e-6);
    }
  }
}

TEST(QpSolver, ElasticRowAbsorbsInfeasibility) {
  DenseQp qp = DenseQp::unconstrained(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1));
  qp.A = Eigen::MatrixXd::Ones(2, 1);
  qp.row_lower = Eigen::Vector2d(1.0, -kInf);
  qp.row_upper = Eigen::Vector2d(kInf, -1.0);
  qp.row_penalty = Eigen::Vector2d(10.0, 10.0);
  const auto sol = solve_qp(qp);
  ASSERT_EQ(sol.status, QpStatus::Solved);
  EXPECT_NEAR(sol.x(0), 0.0, 1e-6);
  EXPECT_NEAR(sol.row_violation.sum(), 2.0, 1e-6);
}

TEST(QpSolver, HardInfeasible) {
  DenseQp qp = DenseQp::unconstrained(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1));
  qp.A = Eigen::MatrixXd::Ones(1, 1);
  qp.row_lower = Eigen::VectorXd::Constant(1, 3.0);
  qp.row_upper = Eigen::VectorXd::Constant(1, kInf);
  qp.row_penalty = Eigen::VectorXd::Constant(1, kInf);
  qp.lower = Eigen::VectorXd::Constant(1, -1.0);
  qp.upper = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_NE(solve_qp(qp).status, QpStatus::Solved);
}

}  // namespace
}  // namespace clsid
