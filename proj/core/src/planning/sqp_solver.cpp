#include "clsid/planning/sqp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "clsid/planning/kinematics.hpp"

namespace clsid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kVx = 0, kVy = 1, kZ = 2, kWyaw = 3;

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// Constraint row of the condensed problem: lo <= value + grad' dz <= hi.
struct Row {
  double value;
  double lo;
  double hi;
  double penalty;
  bool dcbf;
  Eigen::RowVectorXd grad;

  double violation(double v) const { return std::max({lo - v, v - hi, 0.0}); }
};

class Condensed {
 public:
  explicit Condensed(const NmpcProblem& p) : p_(p), N_(p.horizon()), n_(p.lti_states()) {
    nz_ = 4 * N_ + (N_ - 1);
    const Eigen::MatrixXd& A = p.model.A();
    const Eigen::MatrixXd& B = p.model.B();
    const Eigen::MatrixXd& C = p.model.C();
    // Markov blocks C A^m B and free response C A^k x_init.
    std::vector<Eigen::MatrixXd> markov;
    Eigen::MatrixXd AmB = B;
    for (int m = 0; m < N_; ++m) {
      markov.push_back(C * AmB);
      AmB = A * AmB;
    }
    Eigen::VectorXd x = p.x_init;
    for (int k = 0; k <= N_; ++k) {
      free_.push_back(C * x);
      x = A * x;
    }
    out_jac_.assign(N_ + 1, Eigen::MatrixXd::Zero(4, nz_));
    for (int k = 1; k <= N_; ++k) {
      for (int j = 0; j < k; ++j) out_jac_[k].block(0, 4 * j, 4, 4) = markov[k - 1 - j];
    }
    const double rho = p.params.rho;
    sR_ = psd_sqrt(p.params.R / rho);
    sQ_ = psd_sqrt(p.params.Q / rho);
    sdQ_ = psd_sqrt(p.params.dQ / rho);
    sK_ = psd_sqrt(p.params.K / rho);
    w_dcbf_ = p.params.dcbf_penalty_ratio;
    w_soft_ = p.params.soft_penalty_ratio;

    lower_.resize(nz_);
    upper_.resize(nz_);
    for (int k = 0; k < N_; ++k) {
      for (int c = 0; c < 4; ++c) {
        lower_(4 * k + c) = p.params.input_bounds[c].lo;
        upper_(4 * k + c) = p.params.input_bounds[c].hi;
      }
    }
    lower_.tail(N_ - 1).setZero();
    upper_.tail(N_ - 1).setConstant(kInf);

    // Output rows that no admissible input sequence can violate are dropped.
    reachable_.assign(N_ + 1, {false, false, false, false});
    for (int k = 1; k <= N_; ++k) {
      for (int c = 0; c < 4; ++c) {
        double lo = free_[k](c), hi = free_[k](c);
        for (int j = 0; j < 4 * N_; ++j) {
          const double g = out_jac_[k](c, j);
          lo += g > 0.0 ? g * lower_(j) : g * upper_(j);
          hi += g > 0.0 ? g * upper_(j) : g * lower_(j);
        }
        const auto& b = p.params.output_bounds[c];
        reachable_[k][c] = lo < b.lo || hi > b.hi;
      }
    }
  }

  int size() const { return nz_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  Eigen::Vector4d output(const Eigen::VectorXd& z, int k) const {
    return free_[k] + out_jac_[k].leftCols(4 * k) * z.head(4 * k);
  }

  struct Eval {
    std::vector<Eigen::Vector4d> outputs;
    std::vector<Pose2> poses;
    std::vector<Eigen::MatrixXd> pose_jac;  // 3 x nz
    Eigen::VectorXd residual;
    Eigen::MatrixXd residual_jac;
    std::vector<Row> rows;
    double cost = 0.0;  // normalized by rho
    double merit = 0.0;
  };

  Eval evaluate(const Eigen::VectorXd& z, bool with_derivatives,
                const std::vector<std::vector<int>>* activation) const {
    Eval e;
    for (int k = 0; k <= N_; ++k) e.outputs.push_back(output(z, k));
    e.poses.push_back(p_.pose_init);
    if (with_derivatives) e.pose_jac.push_back(Eigen::MatrixXd::Zero(3, nz_));
    for (int k = 0; k < N_; ++k) {
      const Eigen::Vector4d& o = e.outputs[k];
      const Pose2& pk = e.poses.back();
      if (with_derivatives) {
        const auto J = rollout_jacobian(pk, o(kVx), o(kVy), p_.params.dt);
        Eigen::MatrixXd Ov(3, nz_);
        Ov.row(0) = out_jac_[k].row(kVx);
        Ov.row(1) = out_jac_[k].row(kVy);
        Ov.row(2) = out_jac_[k].row(kWyaw);
        e.pose_jac.push_back(J.leftCols<3>() * e.pose_jac.back() + J.rightCols<3>() * Ov);
      }
      e.poses.push_back(rollout_kinematics(pk, o(kVx), o(kVy), o(kWyaw), p_.params.dt));
    }

    // Cost residuals.
    const int nr = 4 * N_ + 8 * (N_ - 1) + (N_ - 1) + 3;
    e.residual.resize(nr);
    if (with_derivatives) e.residual_jac.setZero(nr, nz_);
    int r = 0;
    for (int i = 0; i < N_; ++i) {
      e.residual.segment<4>(r) = sR_ * (z.segment<4>(4 * i) - p_.params.u_nominal);
      if (with_derivatives) e.residual_jac.block(r, 4 * i, 4, 4) = sR_;
      r += 4;
    }
    for (int i = 1; i <= N_ - 1; ++i) {
      e.residual.segment<4>(r) = sQ_ * (e.outputs[i] - p_.output_equilibrium);
      if (with_derivatives) e.residual_jac.block(r, 0, 4, nz_) = sQ_ * out_jac_[i];
      r += 4;
      e.residual.segment<4>(r) = sdQ_ * (e.outputs[i + 1] - e.outputs[i]);
      if (with_derivatives) {
        e.residual_jac.block(r, 0, 4, nz_) = sdQ_ * (out_jac_[i + 1] - out_jac_[i]);
      }
      r += 4;
    }
    for (int i = 1; i <= N_ - 1; ++i) {
      e.residual(r) = 1.0 - z(omega_index(i));
      if (with_derivatives) e.residual_jac(r, omega_index(i)) = -1.0;
      ++r;
    }
    const Pose2& pN = e.poses.back();
    const Eigen::Vector3d delta(pN.x - p_.target.x, pN.y - p_.target.y, pN.yaw - p_.target.yaw);
    e.residual.segment<3>(r) = sK_ * delta;
    if (with_derivatives) e.residual_jac.block(r, 0, 3, nz_) = sK_ * e.pose_jac.back();
    e.cost = e.residual.squaredNorm();

    // Constraint rows.
    const double radius = p_.scenario.planning_radius();
    const double alpha = p_.params.alpha;
    auto grad_xy = [&](int k, const Eigen::Vector2d& g) -> Eigen::RowVectorXd {
      return g.transpose() * e.pose_jac[k].topRows(2);
    };
    for (int k = 1; k <= N_ - 1; ++k) {
      const double w = z(omega_index(k));
      for (const auto& obs : p_.scenario.obstacles) {
        const Pose2& a = e.poses[k];
        const Pose2& b = e.poses[k + 1];
        const double d0 = obstacle_distance(a.x, a.y, obs, radius);
        const double d1 = obstacle_distance(b.x, b.y, obs, radius);
        Row row{d1 - w * alpha * d0, 0.0, kInf, w_dcbf_, true, {}};
        if (with_derivatives) {
          row.grad = grad_xy(k + 1, obstacle_distance_gradient(b.x, b.y, obs)) -
                     w * alpha * grad_xy(k, obstacle_distance_gradient(a.x, a.y, obs));
          row.grad(omega_index(k)) += -alpha * d0;
        }
        e.rows.push_back(std::move(row));
      }
    }
    for (int k = 1; k <= N_; ++k) {
      for (int c = 0; c < 4; ++c) {
        if (!reachable_[k][c]) continue;
        const auto& b = p_.params.output_bounds[c];
        Row row{e.outputs[k](c), b.lo, b.hi, w_soft_, false, {}};
        if (with_derivatives) row.grad = out_jac_[k].row(c);
        e.rows.push_back(std::move(row));
      }
      if (activation != nullptr) {
        for (int reg : (*activation)[k]) {
          const double cap = p_.scenario.height_regions[reg].hmax - p_.params.height_margin;
          Row row{e.outputs[k](kZ), -kInf, cap, w_soft_, false, {}};
          if (with_derivatives) row.grad = out_jac_[k].row(kZ);
          e.rows.push_back(std::move(row));
        }
      }
    }
    e.merit = e.cost;
    for (const auto& row : e.rows) e.merit += row.penalty * row.violation(row.value);
    return e;
  }

  int omega_index(int k) const { return 4 * N_ + (k - 1); }

 private:
  const NmpcProblem& p_;
  int N_;
  int n_;
  int nz_;
  std::vector<Eigen::Vector4d> free_;
  std::vector<Eigen::MatrixXd> out_jac_;
  std::vector<std::array<bool, 4>> reachable_;
  Eigen::MatrixXd sR_, sQ_, sdQ_, sK_;
  double w_dcbf_, w_soft_;
  Eigen::VectorXd lower_, upper_;
};

PlanResult assemble(const NmpcProblem& p, const Condensed& cond, const Eigen::VectorXd& z,
                    const Condensed::Eval& e, const std::vector<std::vector<int>>& activation) {
  const int N = p.horizon();
  const int n = p.lti_states();
  PlanResult out;
  out.states.resize(N + 1, n + 3);
  out.outputs.resize(N + 1, 4);
  out.inputs.resize(N, 4);
  Eigen::VectorXd x = p.x_init;
  for (int k = 0; k <= N; ++k) {
    out.states.row(k).head(n) = x.transpose();
    out.states(k, n) = e.poses[k].x;
    out.states(k, n + 1) = e.poses[k].y;
    out.states(k, n + 2) = e.poses[k].yaw;
    out.outputs.row(k) = e.outputs[k].transpose();
    if (k < N) {
      const Eigen::Vector4d u = z.segment<4>(4 * k);
      out.inputs.row(k) = u.transpose();
      x = p.model.A() * x + p.model.B() * u;
    }
  }
  out.omega = z.tail(N - 1);
  const Pose2& pN = e.poses.back();
  out.delta = {pN.x - p.target.x, pN.y - p.target.y, pN.yaw - p.target.yaw};
  const auto& obstacles = p.scenario.obstacles;
  out.distances.resize(N + 1, static_cast<Eigen::Index>(obstacles.size()));
  for (int k = 0; k <= N; ++k) {
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      out.distances(k, static_cast<Eigen::Index>(i)) =
          obstacle_distance(e.poses[k].x, e.poses[k].y, obstacles[i], p.scenario.planning_radius());
    }
  }
  out.height_active = activation;
  out.cost = e.cost * p.params.rho;
  for (const auto& row : e.rows) {
    const double v = row.violation(row.value);
    if (row.dcbf) {
      out.dcbf_violation = std::max(out.dcbf_violation, v);
    } else {
      out.soft_violation = std::max(out.soft_violation, v);
    }
  }
  (void)cond;
  return out;
}

Eigen::VectorXd initial_guess(const NmpcProblem& p, const Condensed& cond,
                              const PlanResult* warm, int shift) {
  const int N = p.horizon();
  Eigen::VectorXd z(cond.size());
  for (int k = 0; k < N; ++k) z.segment<4>(4 * k) = p.params.u_nominal;
  z.tail(N - 1).setOnes();
  if (warm != nullptr && warm->inputs.rows() == N && warm->inputs.cols() == 4 &&
      warm->omega.size() == N - 1) {
    const int s = std::max(shift, 0);
    for (int k = 0; k < N; ++k) {
      z.segment<4>(4 * k) = warm->inputs.row(std::min(k + s, N - 1)).transpose();
    }
    for (int k = 1; k <= N - 1; ++k) z(4 * N + k - 1) = warm->omega(std::min(k - 1 + s, N - 2));
  }
  return z.cwiseMax(cond.lower()).cwiseMin(cond.upper());
}

}  // namespace

PlanResult solve(const NmpcProblem& problem, const PlanResult* warm_start,
                 const SolveOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const Condensed cond(problem);
  const int nz = cond.size();
  Eigen::VectorXd z = initial_guess(problem, cond, warm_start, options.warm_start_shift);

  auto poses_of = [&](const Eigen::VectorXd& zz) {
    return cond.evaluate(zz, false, nullptr).poses;
  };
  std::vector<std::vector<int>> activation = problem.activation_for(poses_of(z));

  int iterations = 0;
  int qp_iterations = 0;
  bool converged = false;
  double kkt = kInf;
  for (int it = 0; it < problem.params.sqp_max_iter; ++it) {
    const auto e = cond.evaluate(z, true, &activation);
    const Eigen::Index m = static_cast<Eigen::Index>(e.rows.size());
    DenseQp qp;
    qp.H = 2.0 * e.residual_jac.transpose() * e.residual_jac;
    qp.H.diagonal().array() += 1e-9;
    qp.c = 2.0 * e.residual_jac.transpose() * e.residual;
    qp.A.resize(m, nz);
    qp.row_lower.resize(m);
    qp.row_upper.resize(m);
    qp.row_penalty.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Row& row = e.rows[i];
      qp.A.row(i) = row.grad;
      qp.row_lower(i) = row.lo - row.value;
      qp.row_upper(i) = row.hi - row.value;
      qp.row_penalty(i) = row.penalty;
    }
    qp.lower = cond.lower() - z;
    qp.upper = cond.upper() - z;
    const QpSolution sol = solve_qp(qp, options.qp);
    ++iterations;
    qp_iterations += sol.iterations;
    const Eigen::VectorXd& dz = sol.x;

    // KKT residual of the program at z with the QP multipliers: the QP's
    // stationarity makes grad L(z) = -H dz.
    double complementarity = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Row& row = e.rows[i];
      const double lam = sol.row_multipliers(i);
      const double viol = row.violation(row.value);
      if (viol > 0.0) {
        complementarity = std::max(complementarity, (row.penalty - std::abs(lam)) * viol);
      } else {
        const double slack = lam >= 0.0 ? row.value - row.lo : row.hi - row.value;
        if (std::isfinite(slack)) complementarity = std::max(complementarity, std::abs(lam) * slack);
      }
    }
    for (int j = 0; j < nz; ++j) {
      const double nu = sol.bound_multipliers(j);
      const double slack = nu >= 0.0 ? z(j) - cond.lower()(j) : cond.upper()(j) - z(j);
      if (std::isfinite(slack)) complementarity = std::max(complementarity, std::abs(nu) * slack);
    }
    kkt = std::max((qp.H * dz).lpNorm<Eigen::Infinity>(), complementarity);
    if (kkt <= problem.params.kkt_tol) {
      converged = true;
      break;
    }

    double model_penalty = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) model_penalty += e.rows[i].penalty * sol.row_violation(i);
    const double predicted =
        e.merit - (e.cost + qp.c.dot(dz) + 0.5 * dz.dot(qp.H * dz) + model_penalty);
    double t = 1.0;
    Eigen::VectorXd trial = z;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      trial = (z + t * dz).cwiseMax(cond.lower()).cwiseMin(cond.upper());
      const double merit = cond.evaluate(trial, false, &activation).merit;
      if (merit <= e.merit - 1e-4 * t * std::max(predicted, 0.0)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    z = trial;
    activation = problem.activation_for(poses_of(z));
  }

  const auto final_eval = cond.evaluate(z, false, &activation);
  PlanResult out = assemble(problem, cond, z, final_eval, activation);
  out.sqp_iterations = iterations;
  out.qp_iterations = qp_iterations;
  out.kkt_residual = kkt;
  if (out.dcbf_violation > problem.params.constraint_tol) {
    out.status = PlanStatus::InfeasibleQp;
  } else {
    out.status = converged ? PlanStatus::Optimal : PlanStatus::MaxIterations;
  }
  out.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace clsid
