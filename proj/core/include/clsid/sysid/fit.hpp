#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clsid/lti/transfer_function.hpp"
#include "clsid/signals/io_record.hpp"

namespace clsid {

struct FitConfig {
  int n_poles = 3;
  int n_zeros = 2;
  /// Output samples used by the cost are every `decimation`-th raw sample.
  /// The simulation itself still integrates every raw input sample exactly.
  int decimation = 20;
  int max_iterations = 200;
  /// Relative cost decrease below which a start stops iterating.
  double cost_tolerance = 1e-12;
  /// Normalized gradient bound that marks a start as converged.
  double gradient_tolerance = 1e-9;
  int multistart = 5;
  bool allow_unstable = true;
  std::uint64_t seed = 0;
  /// Horizon for the k-step predictive fit reported in FitResult; 0 skips it.
  int kstep = 5;

  void validate() const;
};

struct FitResult {
  TransferFunction model{{1.0}, {1.0, 1.0}};
  /// Simulation fit on the (decimated) training data, percent.
  double fit_percent = 0.0;
  /// k-step-ahead predictive fit on the raw training data, percent (NaN if skipped).
  double kstep_fit_percent = 0.0;
  double residual_norm = 0.0;
  /// max_i |g_i| / sqrt(H_ii * 2 cost) at the returned parameters.
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Continuous-time output-error problem for a fixed structure and data set.
///
/// Parameters are ordered like the coefficient vectors: numerator
/// (b_m ... b_0) followed by the non-leading denominator coefficients
/// (a_{n-1} ... a_0). The model starts at equilibrium for the first input
/// sample and the input is held constant between raw samples.
class OutputErrorProblem {
 public:
  OutputErrorProblem(std::span<const double> u, std::span<const double> y, double dt,
                     int decimation, int n_poles, int n_zeros);

  int parameter_count() const { return n_zeros_ + 1 + n_poles_; }
  int n_poles() const { return n_poles_; }
  int n_zeros() const { return n_zeros_; }
  Eigen::Index samples() const { return measured_.size(); }
  double sample_time() const { return dt_ * decimation_; }
  const Eigen::VectorXd& measured() const { return measured_; }

  Eigen::VectorXd parameters(const TransferFunction& tf) const;
  TransferFunction model(const Eigen::VectorXd& theta) const;

  /// Model output at the decimated instants. Non-finite entries signal a
  /// model that cannot be simulated (e.g. infinite DC gain).
  Eigen::VectorXd simulate(const Eigen::VectorXd& theta) const;
  /// Model output and its analytic Jacobian d y_hat / d theta.
  Eigen::VectorXd simulate(const Eigen::VectorXd& theta, Eigen::MatrixXd& jacobian) const;

  /// ARX least squares on the decimated data, poles mapped to continuous time
  /// through s = log(z)/T, numerator by linear least squares.
  TransferFunction arx_initial_guess() const;

  /// Best numerator for a fixed denominator (linear least squares).
  TransferFunction fit_numerator(const Polynomial& den) const;

 private:
  // States of 1/den driven by (u - u0) at decimated instants (rows).
  Eigen::MatrixXd block_states(const Eigen::MatrixXd& A, const Eigen::VectorXd& B) const;

  std::vector<double> v_;  // u - u0 at raw rate
  double u0_ = 0.0;
  double dt_;
  int decimation_;
  int n_poles_;
  int n_zeros_;
  Eigen::VectorXd measured_;
  Eigen::VectorXd input_decimated_;
};

/// Fits a strictly proper continuous transfer function by minimizing the
/// simulation error, Levenberg-Marquardt damped Gauss-Newton from an ARX
/// start plus `multistart - 1` log-perturbed restarts and any @p extra_starts.
FitResult fit_tf(std::span<const double> u, std::span<const double> y, double dt,
                 const FitConfig& cfg, std::span<const TransferFunction> extra_starts = {});

/// Convenience overload fitting input/output column @p channel of @p rec.
FitResult fit_tf(const IoRecord& rec, int channel, const FitConfig& cfg);

/// Pole/zero counts the identified models use per channel: 3/2, 3/1, 3/1, 3/2.
FitConfig default_structure(Channel c);

}  // namespace clsid
