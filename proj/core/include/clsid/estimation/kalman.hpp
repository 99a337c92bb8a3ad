#pragma once

#include <Eigen/Core>

#include "clsid/lti/state_space.hpp"

namespace clsid {

struct KalmanConfig {
  Eigen::MatrixXd process_noise;       // n x n, symmetric PSD
  Eigen::MatrixXd measurement_noise;   // p x p, symmetric PD
  Eigen::MatrixXd initial_covariance;  // n x n, symmetric PSD

  /// Q = 1e-4 I, R = diag(noise_std^2) with 0.05^2 where a std is not positive,
  /// P0 = I.
  static KalmanConfig defaults(Eigen::Index states, const Eigen::VectorXd& noise_std);

  void validate(Eigen::Index states, Eigen::Index outputs) const;
};

struct EstimatorState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  /// Innovation y - (C x + D u) and its covariance from the latest update.
  Eigen::VectorXd innovation;
  Eigen::MatrixXd innovation_covariance;

  static EstimatorState initial(const Eigen::VectorXd& mean, const KalmanConfig& cfg);

  /// innovation^T S^{-1} innovation of the latest update.
  double normalized_innovation_squared() const;
};

/// Time update through the discrete model: x <- A x + B u, P <- A P A^T + Q.
EstimatorState predict(const EstimatorState& est, const StateSpaceModel& model,
                       const Eigen::VectorXd& u, const KalmanConfig& cfg);

/// Joseph-form measurement update. @p u enters only through D (may be empty
/// when D is zero). Throws NumericalError if the innovation covariance is singular.
EstimatorState update(const EstimatorState& est, const StateSpaceModel& model,
                      const Eigen::VectorXd& y, const KalmanConfig& cfg,
                      const Eigen::VectorXd& u = {});

struct SteadyStateFilter {
  /// Filter-form gain: x_post = x_prior + K (y - C x_prior - D u).
  Eigen::MatrixXd gain;
  Eigen::MatrixXd prior_covariance;
  int iterations = 0;
};

/// Iterates the covariance recursion from cfg.initial_covariance until the
/// relative change drops below 1e-10; DetectabilityError after 1e5 iterations.
SteadyStateFilter steady_state_filter(const StateSpaceModel& model, const KalmanConfig& cfg);

Eigen::MatrixXd steady_state_gain(const StateSpaceModel& model, const KalmanConfig& cfg);

}  // namespace clsid
