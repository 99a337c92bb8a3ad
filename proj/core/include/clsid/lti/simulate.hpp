#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "clsid/lti/state_space.hpp"

namespace clsid {

/// Runs x_{k+1} = A x_k + B u_k, y_k = C x_k + D u_k for a discrete model.
/// @p u holds one sample per row (N x m); the result is N x p.
Eigen::MatrixXd simulate_lti(const StateSpaceModel& ss, const Eigen::MatrixXd& u,
                             const Eigen::VectorXd& x0);

/// Same with a zero initial state.
Eigen::MatrixXd simulate_lti(const StateSpaceModel& ss, const Eigen::MatrixXd& u);

/// Response of @p tf to samples @p u held over each period @p dt, starting
/// at equilibrium for u[0].
std::vector<double> simulate_tf(const TransferFunction& tf, std::span<const double> u, double dt);

}  // namespace clsid
