#include "clsid/sysid/prediction.hpp"

#include <cmath>
#include <limits>

#include "clsid/error.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/signals/metrics.hpp"

namespace clsid {

KStepPrediction k_step_predict(const StateSpaceModel& model, const Eigen::MatrixXd& u,
                               const Eigen::MatrixXd& y, int k, const KalmanConfig& cfg) {
  require(k >= 1, "k", "must be >= 1");
  require(model.is_discrete(), "model", "must be discrete");
  require(u.cols() == model.inputs(), "u", "column count must match model inputs");
  require(y.cols() == model.outputs(), "y", "column count must match model outputs");
  require(u.rows() == y.rows(), "y", "input and output lengths differ");
  const Eigen::Index N = y.rows();
  require(N > k + 1, "data", "too short for the prediction horizon");

  const Eigen::MatrixXd K = steady_state_gain(model, cfg);
  const Eigen::MatrixXd& A = model.A();
  const Eigen::MatrixXd& B = model.B();
  const Eigen::MatrixXd& C = model.C();
  const Eigen::MatrixXd& D = model.D();

  KStepPrediction out;
  out.k = k;
  out.predicted = Eigen::MatrixXd::Constant(N, y.cols(), std::numeric_limits<double>::quiet_NaN());

  Eigen::VectorXd x = model.equilibrium(u.row(0).transpose());
  Eigen::VectorXd z(x.size());
  for (Eigen::Index j = 0; j + k < N; ++j) {
    const Eigen::VectorXd uj = u.row(j).transpose();
    x += K * (y.row(j).transpose() - C * x - D * uj);
    z = x;
    for (int i = 0; i < k; ++i) z = A * z + B * u.row(j + i).transpose();
    out.predicted.row(j + k) = (C * z + D * u.row(j + k).transpose()).transpose();
    x = A * x + B * uj;
  }

  out.fit_percent.resize(y.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    const Eigen::VectorXd actual = y.col(c).tail(N - k);
    const Eigen::VectorXd pred = out.predicted.col(c).tail(N - k);
    out.fit_percent(c) =
        fit_percentage({actual.data(), static_cast<std::size_t>(actual.size())},
                       {pred.data(), static_cast<std::size_t>(pred.size())});
  }
  return out;
}

KStepPrediction k_step_predict(const StateSpaceModel& model, const IoRecord& data, int k,
                               const Eigen::VectorXd& noise_std) {
  data.validate();
  Eigen::VectorXd std_dev = noise_std;
  if (std_dev.size() == 0) std_dev = Eigen::VectorXd::Zero(model.outputs());
  require(std_dev.size() == model.outputs(), "noise_std", "needs one entry per output");
  const KalmanConfig cfg = KalmanConfig::defaults(model.states(), std_dev);
  return k_step_predict(model, data.u, data.y, k, cfg);
}

KStepPrediction k_step_predict(const TransferFunction& tf, std::span<const double> u,
                               std::span<const double> y, double dt, int k,
                               double noise_std) {
  require(u.size() == y.size(), "y", "input and output lengths differ");
  const StateSpaceModel disc = c2d_zoh(tf_to_ss_ccf(tf), dt);
  const auto N = static_cast<Eigen::Index>(u.size());
  const Eigen::MatrixXd um = Eigen::Map<const Eigen::VectorXd>(u.data(), N);
  const Eigen::MatrixXd ym = Eigen::Map<const Eigen::VectorXd>(y.data(), N);
  const KalmanConfig cfg =
      KalmanConfig::defaults(disc.states(), Eigen::VectorXd::Constant(1, noise_std));
  return k_step_predict(disc, um, ym, k, cfg);
}

}  // namespace clsid
