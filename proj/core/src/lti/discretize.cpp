#include "clsid/lti/discretize.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "clsid/error.hpp"

namespace clsid {

StateSpaceModel c2d_zoh(const StateSpaceModel& ss, double dt) {
  if (ss.is_discrete()) throw StructuralError("c2d_zoh expects a continuous model");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt: must be positive");
  const int n = ss.states();
  const int m = ss.inputs();
  // M = [A B; 0 0],  e^{M dt} = [A_d B_d; 0 I]
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = ss.A();
  M.topRightCorner(n, m) = ss.B();
  const Eigen::MatrixXd phi = (M * dt).exp();
  return StateSpaceModel(phi.topLeftCorner(n, n), phi.topRightCorner(n, m), ss.C(), ss.D(), dt);
}

}  // namespace clsid
