#include "clsid/lti/simulate.hpp"

#include "clsid/error.hpp"
#include "clsid/lti/discretize.hpp"

namespace clsid {

Eigen::MatrixXd simulate_lti(const StateSpaceModel& ss, const Eigen::MatrixXd& u,
                             const Eigen::VectorXd& x0) {
  if (!ss.is_discrete()) throw StructuralError("simulate_lti expects a discrete model");
  if (u.cols() != ss.inputs()) throw StructuralError("input channel count does not match B");
  if (x0.size() != ss.states()) throw StructuralError("x0 length does not match state dimension");
  const Eigen::Index N = u.rows();
  Eigen::MatrixXd y(N, ss.outputs());
  Eigen::VectorXd x = x0;
  Eigen::VectorXd next(x.size());
  for (Eigen::Index k = 0; k < N; ++k) {
    const auto uk = u.row(k).transpose();
    y.row(k) = (ss.C() * x + ss.D() * uk).transpose();
    next.noalias() = ss.A() * x;
    next.noalias() += ss.B() * uk;
    x.swap(next);
  }
  return y;
}

Eigen::MatrixXd simulate_lti(const StateSpaceModel& ss, const Eigen::MatrixXd& u) {
  return simulate_lti(ss, u, Eigen::VectorXd::Zero(ss.states()));
}

std::vector<double> simulate_tf(const TransferFunction& tf, std::span<const double> u, double dt) {
  if (u.empty()) return {};
  const StateSpaceModel disc = c2d_zoh(tf_to_ss_ccf(tf), dt);
  const auto N = static_cast<Eigen::Index>(u.size());
  const Eigen::MatrixXd um = Eigen::Map<const Eigen::VectorXd>(u.data(), N);
  const Eigen::MatrixXd y =
      simulate_lti(disc, um, disc.equilibrium(Eigen::VectorXd::Constant(1, u.front())));
  return {y.data(), y.data() + N};
}

}  // namespace clsid
