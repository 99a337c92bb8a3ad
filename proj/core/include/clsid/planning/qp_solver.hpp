#pragma once

#include <Eigen/Core>

namespace clsid {

/// Convex quadratic program
///
///   minimize    1/2 x'Hx + c'x + sum_i w_i * viol_i(x)
///   subject to  row_lower <= A x <= row_upper   (row i elastic when w_i finite)
///               lower <= x <= upper             (always hard)
///
/// where viol_i is the amount by which row i misses its interval. Rows with
/// an infinite penalty are hard. Infinite bounds disable that side.
struct DenseQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd row_lower;
  Eigen::VectorXd row_upper;
  Eigen::VectorXd row_penalty;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Problem with @p n variables, no rows and no bounds.
  static DenseQp unconstrained(const Eigen::MatrixXd& H, const Eigen::VectorXd& c);
  void validate() const;
};

struct QpSettings {
  double tolerance = 1e-9;
  // Accepted when the iterates stall before reaching `tolerance`.
  double acceptable_tolerance = 1e-6;
  int max_iterations = 80;
};

enum class QpStatus { Solved, MaxIterations, Infeasible };

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Eigen::VectorXd x;
  /// Multiplier of each row: positive when pushing up against the lower
  /// side, negative against the upper side.
  Eigen::VectorXd row_multipliers;
  Eigen::VectorXd bound_multipliers;
  /// Elastic violation of each row at x (zero for hard rows).
  Eigen::VectorXd row_violation;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense primal-dual interior-point method with Mehrotra predictor-corrector
/// steps. Deterministic; H must be symmetric positive semidefinite.
QpSolution solve_qp(const DenseQp& qp, const QpSettings& settings = {});

}  // namespace clsid
