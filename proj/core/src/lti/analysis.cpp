#include "clsid/lti/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "clsid/error.hpp"

namespace clsid {

PoleZeroReport poles_zeros(const TransferFunction& tf) {
  PoleZeroReport report;
  report.poles = roots(tf.den());
  if (tf.num_degree() > 0) report.zeros = roots(tf.num());
  report.asymptotically_stable = std::all_of(report.poles.begin(), report.poles.end(),
                                             [](const auto& p) { return p.real() < 0.0; });
  report.minimum_phase = std::all_of(report.zeros.begin(), report.zeros.end(),
                                     [](const auto& z) { return z.real() < 0.0; });
  return report;
}

bool is_asymptotically_stable(const StateSpaceModel& ss) {
  if (ss.states() == 0) return true;
  const Eigen::VectorXcd eig = ss.A().eigenvalues();
  for (int i = 0; i < eig.size(); ++i) {
    if (ss.is_discrete() ? std::abs(eig(i)) >= 1.0 : eig(i).real() >= 0.0) return false;
  }
  return true;
}

Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw StructuralError("Lyapunov solve needs square A and Q of equal size");
  }
  // Column-major vec: vec(A X + X A^T) = (I kron A + A kron I) vec(X).
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) = I(i, j) * A + A(i, j) * I;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  Eigen::VectorXd x = lu.solve(rhs);
  Eigen::MatrixXd X = Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

std::vector<double> hankel_singular_values(const StateSpaceModel& ss) {
  if (ss.is_discrete()) throw StructuralError("hankel_singular_values expects a continuous model");
  if (!is_asymptotically_stable(ss)) {
    throw StabilityError("Hankel singular values require an asymptotically stable model");
  }
  const Eigen::MatrixXd P = solve_continuous_lyapunov(ss.A(), ss.B() * ss.B().transpose());
  const Eigen::MatrixXd Q = solve_continuous_lyapunov(ss.A().transpose(),
                                                      ss.C().transpose() * ss.C());
  const Eigen::VectorXcd eig = (P * Q).eigenvalues();
  std::vector<double> hsv(eig.size());
  for (int i = 0; i < eig.size(); ++i) hsv[i] = std::sqrt(std::max(eig(i).real(), 0.0));
  std::sort(hsv.begin(), hsv.end(), std::greater<>());
  return hsv;
}

std::vector<std::complex<double>> frequency_response(const TransferFunction& tf,
                                                     const std::vector<double>& freqs_hz) {
  std::vector<std::complex<double>> out;
  out.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    out.push_back(tf.evaluate({0.0, 2.0 * std::numbers::pi * f}));
  }
  return out;
}

}  // namespace clsid
