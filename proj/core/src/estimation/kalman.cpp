#include "clsid/estimation/kalman.hpp"

#include <complex>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "clsid/error.hpp"

namespace clsid {

namespace {

void require_discrete(const StateSpaceModel& model) {
  if (!model.is_discrete()) {
    throw ValidationError("model: the filter needs a discrete-time model");
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& P) { return 0.5 * (P + P.transpose()); }

bool is_symmetric(const Eigen::MatrixXd& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

}  // namespace

KalmanConfig KalmanConfig::defaults(Eigen::Index states, const Eigen::VectorXd& noise_std) {
  KalmanConfig cfg;
  cfg.process_noise = 1e-4 * Eigen::MatrixXd::Identity(states, states);
  cfg.measurement_noise = Eigen::MatrixXd::Zero(noise_std.size(), noise_std.size());
  for (Eigen::Index i = 0; i < noise_std.size(); ++i) {
    const double s = noise_std(i) > 0.0 ? noise_std(i) : 0.05;
    cfg.measurement_noise(i, i) = s * s;
  }
  cfg.initial_covariance = Eigen::MatrixXd::Identity(states, states);
  return cfg;
}

void KalmanConfig::validate(Eigen::Index states, Eigen::Index outputs) const {
  require(process_noise.rows() == states && process_noise.cols() == states, "process_noise",
          "must be n x n");
  require(measurement_noise.rows() == outputs && measurement_noise.cols() == outputs,
          "measurement_noise", "must be p x p");
  require(initial_covariance.rows() == states && initial_covariance.cols() == states,
          "initial_covariance", "must be n x n");
  require(is_symmetric(process_noise), "process_noise", "must be symmetric");
  require(is_symmetric(measurement_noise), "measurement_noise", "must be symmetric");
  require(is_symmetric(initial_covariance), "initial_covariance", "must be symmetric");
  if (outputs > 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(measurement_noise));
    require(llt.info() == Eigen::Success, "measurement_noise", "must be positive definite");
  }
}

EstimatorState EstimatorState::initial(const Eigen::VectorXd& mean, const KalmanConfig& cfg) {
  EstimatorState est;
  est.mean = mean;
  est.covariance = cfg.initial_covariance;
  return est;
}

double EstimatorState::normalized_innovation_squared() const {
  if (innovation.size() == 0) return 0.0;
  return innovation.dot(innovation_covariance.ldlt().solve(innovation));
}

EstimatorState predict(const EstimatorState& est, const StateSpaceModel& model,
                       const Eigen::VectorXd& u, const KalmanConfig& cfg) {
  require_discrete(model);
  const Eigen::Index n = model.states();
  if (est.mean.size() != n || est.covariance.rows() != n || est.covariance.cols() != n) {
    throw ValidationError("estimator: state dimension does not match the model");
  }
  if (u.size() != model.inputs()) {
    throw ValidationError("u: expected " + std::to_string(model.inputs()) + " inputs");
  }
  if (cfg.process_noise.rows() != n || cfg.process_noise.cols() != n) {
    throw ValidationError("process_noise: must be n x n");
  }
  EstimatorState out = est;
  out.mean = model.A() * est.mean + model.B() * u;
  out.covariance = symmetrized(model.A() * est.covariance * model.A().transpose() +
                               cfg.process_noise);
  return out;
}

EstimatorState update(const EstimatorState& est, const StateSpaceModel& model,
                      const Eigen::VectorXd& y, const KalmanConfig& cfg,
                      const Eigen::VectorXd& u) {
  require_discrete(model);
  const Eigen::Index n = model.states();
  const Eigen::Index p = model.outputs();
  if (est.mean.size() != n || est.covariance.rows() != n) {
    throw ValidationError("estimator: state dimension does not match the model");
  }
  if (y.size() != p) throw ValidationError("y: expected " + std::to_string(p) + " outputs");
  if (cfg.measurement_noise.rows() != p || cfg.measurement_noise.cols() != p) {
    throw ValidationError("measurement_noise: must be p x p");
  }
  const Eigen::MatrixXd& C = model.C();
  Eigen::VectorXd predicted = C * est.mean;
  if (u.size() == model.inputs()) {
    predicted += model.D() * u;
  } else if (u.size() != 0 || !model.D().isZero(0.0)) {
    throw ValidationError("u: needed for the feedthrough term");
  }

  EstimatorState out = est;
  out.innovation = y - predicted;
  out.innovation_covariance = symmetrized(C * est.covariance * C.transpose() + cfg.measurement_noise);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(out.innovation_covariance);
  if (!lu.isInvertible()) throw NumericalError("kalman update: singular innovation covariance");
  const Eigen::MatrixXd K = lu.solve(C * est.covariance).transpose();
  const Eigen::MatrixXd IKC = Eigen::MatrixXd::Identity(n, n) - K * C;
  out.mean = est.mean + K * out.innovation;
  out.covariance = symmetrized(IKC * est.covariance * IKC.transpose() +
                               K * cfg.measurement_noise * K.transpose());
  return out;
}

SteadyStateFilter steady_state_filter(const StateSpaceModel& model, const KalmanConfig& cfg) {
  require_discrete(model);
  cfg.validate(model.states(), model.outputs());
  const Eigen::MatrixXd& A = model.A();
  const Eigen::MatrixXd& C = model.C();
  const Eigen::MatrixXd& Q = cfg.process_noise;
  const Eigen::MatrixXd& R = cfg.measurement_noise;
  const double floor = 1e-6 * (Q.lpNorm<Eigen::Infinity>() + R.lpNorm<Eigen::Infinity>());

  // PBH test on the modes outside the open unit disk.
  const int n = model.states();
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(A.cast<std::complex<double>>());
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const std::complex<double> lambda = eig.eigenvalues()(i);
    if (std::abs(lambda) < 1.0) continue;
    Eigen::MatrixXcd pbh(n + C.rows(), n);
    pbh << lambda * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>(),
        C.cast<std::complex<double>>();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(pbh);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) {
      throw DetectabilityError("steady_state_gain: (A, C) is not detectable");
    }
  }

  constexpr int kMaxIterations = 100000;
  Eigen::MatrixXd P = cfg.initial_covariance;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Eigen::MatrixXd S = C * P * C.transpose() + R;
    const Eigen::MatrixXd APCt = A * P * C.transpose();
    const Eigen::MatrixXd next =
        symmetrized(A * P * A.transpose() + Q - APCt * S.ldlt().solve(APCt.transpose()));
    if (!next.allFinite()) break;
    const double change = (next - P).lpNorm<Eigen::Infinity>();
    P = next;
    if (change <= 1e-10 * std::max(P.lpNorm<Eigen::Infinity>(), floor)) {
      SteadyStateFilter out;
      const Eigen::MatrixXd S_ss = C * P * C.transpose() + R;
      out.gain = S_ss.ldlt().solve(C * P).transpose();
      out.prior_covariance = P;
      out.iterations = it;
      return out;
    }
  }
  throw DetectabilityError(
      "steady_state_gain: covariance recursion did not converge; (A, C) may not be detectable");
}

Eigen::MatrixXd steady_state_gain(const StateSpaceModel& model, const KalmanConfig& cfg) {
  return steady_state_filter(model, cfg).gain;
}

}  // namespace clsid
