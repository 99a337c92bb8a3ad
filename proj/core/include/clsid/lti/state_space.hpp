#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "clsid/lti/transfer_function.hpp"

namespace clsid {

/// (A, B, C, D) realization. Continuous when dt is empty, otherwise discrete
/// with sample period dt seconds.
class StateSpaceModel {
 public:
  StateSpaceModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                  Eigen::MatrixXd D, std::optional<double> dt = std::nullopt);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::MatrixXd& D() const { return D_; }
  std::optional<double> dt() const { return dt_; }

  bool is_discrete() const { return dt_.has_value(); }
  int states() const { return static_cast<int>(A_.rows()); }
  int inputs() const { return static_cast<int>(B_.cols()); }
  int outputs() const { return static_cast<int>(C_.rows()); }

  /// Equilibrium state for constant input @p u: solves 0 = Ax + Bu
  /// (continuous) or x = Ax + Bu (discrete). Returns zero when singular.
  Eigen::VectorXd equilibrium(const Eigen::VectorXd& u) const;

 private:
  Eigen::MatrixXd A_, B_, C_, D_;
  std::optional<double> dt_;
};

/// Control canonical realization of a strictly proper transfer function.
StateSpaceModel tf_to_ss_ccf(const TransferFunction& tf);

/// Transfer function of a SISO model (continuous interpretation of A),
/// returned without any cancellation.
TransferFunction ss_to_tf(const StateSpaceModel& ss);

/// Block-diagonal assembly: A = diag(A_i), B = diag(B_i), C = diag(C_i).
/// All blocks must share the same time domain.
StateSpaceModel block_diagonal(std::span<const StateSpaceModel> blocks);

/// Series connection: @p first drives @p second (y = second(first(u))).
/// @p first must have no direct feedthrough. State order is [x_first; x_second].
StateSpaceModel series(const StateSpaceModel& first, const StateSpaceModel& second);

/// State coordinate change x = T z: (T^-1 A T, T^-1 B, C T, D).
StateSpaceModel similarity_transform(const StateSpaceModel& ss, const Eigen::MatrixXd& T);

}  // namespace clsid
