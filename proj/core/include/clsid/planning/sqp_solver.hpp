#pragma once

#include "clsid/planning/nmpc_problem.hpp"
#include "clsid/planning/qp_solver.hpp"

namespace clsid {

struct SolveOptions {
  /// Steps a warm start is advanced by before reuse (receding horizon);
  /// 0 reuses it as is.
  int warm_start_shift = 1;
  QpSettings qp;
};

/// Sequential quadratic programming on the program built by build_problem.
///
/// States are eliminated by exact rollout, so every iterate satisfies the
/// dynamics and kinematics; the decision variables are the inputs and the
/// decay relaxations. Each iterate solves a convex QP with the Gauss-Newton
/// Hessian of the cost, linearized DCBF rows, output and height rows (all
/// elastic with large penalties) and hard input / omega bounds, followed by
/// a backtracking line search on the l1 merit function.
PlanResult solve(const NmpcProblem& problem, const PlanResult* warm_start = nullptr,
                 const SolveOptions& options = {});

}  // namespace clsid
