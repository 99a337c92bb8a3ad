#include "clsid/lti/state_space.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "clsid/error.hpp"

namespace clsid {

namespace {

// Characteristic polynomial det(sI - M) by Faddeev-LeVerrier, descending.
Polynomial characteristic_polynomial(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  Polynomial c(n + 1, 0.0);
  c[0] = 1.0;
  Eigen::MatrixXd Mk = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    Mk = M * Mk + c[k - 1] * I;
    c[k] = -(M * Mk).trace() / k;
  }
  return c;
}

}  // namespace

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                                 Eigen::MatrixXd D, std::optional<double> dt)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)), dt_(dt) {
  const auto n = A_.rows();
  if (A_.cols() != n) throw StructuralError("A must be square");
  if (B_.rows() != n) throw StructuralError("B must have as many rows as A");
  if (C_.cols() != n) throw StructuralError("C must have as many columns as A");
  if (D_.rows() != C_.rows() || D_.cols() != B_.cols()) {
    throw StructuralError("D must be outputs x inputs (" + std::to_string(C_.rows()) + "x" +
                          std::to_string(B_.cols()) + ")");
  }
  if (dt_ && !(*dt_ > 0.0 && std::isfinite(*dt_))) {
    throw StructuralError("discrete model requires dt > 0");
  }
}

Eigen::VectorXd StateSpaceModel::equilibrium(const Eigen::VectorXd& u) const {
  if (u.size() != inputs()) throw StructuralError("equilibrium input has wrong size");
  const int n = states();
  Eigen::MatrixXd M = is_discrete() ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n) - A_)
                                    : Eigen::MatrixXd(-A_);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) return Eigen::VectorXd::Zero(n);
  return lu.solve(B_ * u);
}

StateSpaceModel tf_to_ss_ccf(const TransferFunction& tf) {
  const int n = tf.order();
  const auto& den = tf.den();
  const auto& num = tf.num();
  if (tf.num_degree() >= n) throw StructuralError("tf_to_ss_ccf requires a strictly proper tf");

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
  // Last row holds -a_0 ... -a_{n-1}; den is descending and monic.
  for (int j = 0; j < n; ++j) A(n - 1, j) = -den[n - j];
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
  B(n - 1, 0) = 1.0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, n);
  const int m = static_cast<int>(num.size());
  for (int j = 0; j < m; ++j) C(0, j) = num[m - 1 - j];
  return StateSpaceModel(A, B, C, Eigen::MatrixXd::Zero(1, 1));
}

TransferFunction ss_to_tf(const StateSpaceModel& ss) {
  if (ss.inputs() != 1 || ss.outputs() != 1) throw StructuralError("ss_to_tf requires SISO");
  // For SISO: C adj(sI - A) B = det(sI - A + BC) - det(sI - A).
  if (ss.D()(0, 0) != 0.0) {
    throw StructuralError("ss_to_tf: model has direct feedthrough (not strictly proper)");
  }
  const Polynomial den = characteristic_polynomial(ss.A());
  const Polynomial shifted = characteristic_polynomial(ss.A() - ss.B() * ss.C());
  Polynomial num(den.size(), 0.0);
  for (std::size_t i = 0; i < den.size(); ++i) num[i] = shifted[i] - den[i];
  // Drop the s^n coefficient, which cancels exactly.
  num.erase(num.begin());
  return TransferFunction(num, den);
}

StateSpaceModel block_diagonal(std::span<const StateSpaceModel> blocks) {
  if (blocks.empty()) throw StructuralError("block_diagonal needs at least one block");
  int n = 0, m = 0, p = 0;
  for (const auto& b : blocks) {
    if (b.dt() != blocks.front().dt()) {
      throw StructuralError("block_diagonal blocks must share a time domain");
    }
    n += b.states();
    m += b.inputs();
    p += b.outputs();
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, m);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, n);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p, m);
  int r = 0, c = 0, o = 0;
  for (const auto& b : blocks) {
    A.block(r, r, b.states(), b.states()) = b.A();
    B.block(r, c, b.states(), b.inputs()) = b.B();
    C.block(o, r, b.outputs(), b.states()) = b.C();
    D.block(o, c, b.outputs(), b.inputs()) = b.D();
    r += b.states();
    c += b.inputs();
    o += b.outputs();
  }
  return StateSpaceModel(A, B, C, D, blocks.front().dt());
}

StateSpaceModel series(const StateSpaceModel& first, const StateSpaceModel& second) {
  if (first.outputs() != second.inputs()) {
    throw StructuralError("series: output count of first must equal input count of second");
  }
  if (first.dt() != second.dt()) throw StructuralError("series: time domains differ");
  if (!first.D().isZero(0.0)) throw StructuralError("series: first model must have D = 0");
  const int n1 = first.states(), n2 = second.states();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = first.A();
  A.bottomLeftCorner(n2, n1) = second.B() * first.C();
  A.bottomRightCorner(n2, n2) = second.A();
  Eigen::MatrixXd B(n1 + n2, first.inputs());
  B << first.B(), Eigen::MatrixXd::Zero(n2, first.inputs());
  Eigen::MatrixXd C(second.outputs(), n1 + n2);
  C << second.D() * first.C(), second.C();
  return StateSpaceModel(A, B, C, Eigen::MatrixXd::Zero(second.outputs(), first.inputs()),
                         first.dt());
}

StateSpaceModel similarity_transform(const StateSpaceModel& ss, const Eigen::MatrixXd& T) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
  if (T.rows() != ss.states() || !lu.isInvertible()) {
    throw StructuralError("similarity transform must be square, invertible, and state-sized");
  }
  const Eigen::MatrixXd Tinv = lu.inverse();
  return StateSpaceModel(Tinv * ss.A() * T, Tinv * ss.B(), ss.C() * T, ss.D(), ss.dt());
}

}  // namespace clsid
