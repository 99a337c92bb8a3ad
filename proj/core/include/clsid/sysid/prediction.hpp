#pragma once

#include <span>

#include <Eigen/Core>

#include "clsid/estimation/kalman.hpp"
#include "clsid/lti/state_space.hpp"
#include "clsid/lti/transfer_function.hpp"
#include "clsid/signals/io_record.hpp"

namespace clsid {

struct KStepPrediction {
  int k = 0;
  /// Row j holds the prediction of y_j made from data up to j - k. Rows
  /// before k have no prediction and are NaN.
  Eigen::MatrixXd predicted;
  /// Fit percentage per output over rows k..N-1.
  Eigen::VectorXd fit_percent;
};

/// k-step-ahead prediction with a steady-state Kalman predictor. At every
/// sample the filter assimilates y_j, then the model is rolled forward k steps
/// open loop with the recorded inputs. The filter starts at the equilibrium
/// of the first input sample.
KStepPrediction k_step_predict(const StateSpaceModel& model, const Eigen::MatrixXd& u,
                               const Eigen::MatrixXd& y, int k, const KalmanConfig& cfg);

/// Same, with the record's inputs/outputs and default filter noise
/// (Q = 1e-4 I, R from @p noise_std with the 0.05 fallback).
KStepPrediction k_step_predict(const StateSpaceModel& model, const IoRecord& data, int k,
                               const Eigen::VectorXd& noise_std = {});

/// SISO convenience: discretizes @p tf with ZOH at @p dt and predicts @p y.
KStepPrediction k_step_predict(const TransferFunction& tf, std::span<const double> u,
                               std::span<const double> y, double dt, int k,
                               double noise_std = 0.0);

}  // namespace clsid
