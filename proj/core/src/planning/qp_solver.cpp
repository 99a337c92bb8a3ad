#include "clsid/planning/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "clsid/error.hpp"

namespace clsid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-sided constraints sign * (a'x) >= rhs, either a general row of A or a
// simple bound on one variable.
struct Sides {
  std::vector<int> source;   // row of A or variable index
  std::vector<double> sign;  // +1 lower side, -1 upper side
  Eigen::VectorXd rhs;
  Eigen::VectorXd penalty;   // +inf when hard
  std::vector<bool> elastic;
};

Sides general_sides(const DenseQp& qp) {
  Sides s;
  std::vector<double> rhs, pen;
  for (Eigen::Index i = 0; i < qp.A.rows(); ++i) {
    if (std::isfinite(qp.row_lower(i))) {
      s.source.push_back(static_cast<int>(i));
      s.sign.push_back(1.0);
      rhs.push_back(qp.row_lower(i));
      pen.push_back(qp.row_penalty(i));
    }
    if (std::isfinite(qp.row_upper(i))) {
      s.source.push_back(static_cast<int>(i));
      s.sign.push_back(-1.0);
      rhs.push_back(-qp.row_upper(i));
      pen.push_back(qp.row_penalty(i));
    }
  }
  s.rhs = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  s.penalty = Eigen::Map<Eigen::VectorXd>(pen.data(), static_cast<Eigen::Index>(pen.size()));
  for (double p : pen) s.elastic.push_back(std::isfinite(p));
  return s;
}

Sides bound_sides(const DenseQp& qp) {
  Sides s;
  std::vector<double> rhs;
  for (Eigen::Index j = 0; j < qp.c.size(); ++j) {
    if (std::isfinite(qp.lower(j))) {
      s.source.push_back(static_cast<int>(j));
      s.sign.push_back(1.0);
      rhs.push_back(qp.lower(j));
    }
    if (std::isfinite(qp.upper(j))) {
      s.source.push_back(static_cast<int>(j));
      s.sign.push_back(-1.0);
      rhs.push_back(-qp.upper(j));
    }
  }
  s.rhs = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  s.penalty = Eigen::VectorXd::Constant(s.rhs.size(), kInf);
  s.elastic.assign(rhs.size(), false);
  return s;
}

// Largest step in (0, 1] keeping v + a*dv >= (1 - fraction) * v.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double fraction) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -fraction * v(i) / dv(i));
  }
  return a;
}

}  // namespace

DenseQp DenseQp::unconstrained(const Eigen::MatrixXd& H, const Eigen::VectorXd& c) {
  DenseQp qp;
  const Eigen::Index n = c.size();
  qp.H = H;
  qp.c = c;
  qp.A.resize(0, n);
  qp.row_lower.resize(0);
  qp.row_upper.resize(0);
  qp.row_penalty.resize(0);
  qp.lower = Eigen::VectorXd::Constant(n, -kInf);
  qp.upper = Eigen::VectorXd::Constant(n, kInf);
  return qp;
}

void DenseQp::validate() const {
  const Eigen::Index n = c.size();
  require(H.rows() == n && H.cols() == n, "H", "must be n x n");
  require(A.cols() == n, "A", "must have n columns");
  const Eigen::Index m = A.rows();
  require(row_lower.size() == m && row_upper.size() == m && row_penalty.size() == m, "rows",
          "row_lower, row_upper and row_penalty need one entry per row");
  require(lower.size() == n && upper.size() == n, "bounds", "need one entry per variable");
  require((row_lower.array() <= row_upper.array()).all(), "rows", "lower side above upper side");
  require((lower.array() <= upper.array()).all(), "bounds", "lower bound above upper bound");
  require((row_penalty.array() > 0.0).all(), "row_penalty", "must be > 0");
}

QpSolution solve_qp(const DenseQp& qp, const QpSettings& settings) {
  qp.validate();
  const Eigen::Index n = qp.c.size();
  const Sides gen = general_sides(qp);
  const Sides bnd = bound_sides(qp);
  const Eigen::Index mg = gen.rhs.size();
  const Eigen::Index mb = bnd.rhs.size();
  const Eigen::Index m = mg + mb;

  // Signed general rows.
  Eigen::MatrixXd Ag(mg, n);
  for (Eigen::Index j = 0; j < mg; ++j) Ag.row(j) = gen.sign[j] * qp.A.row(gen.source[j]);
  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(m);
    out.head(mg).noalias() = Ag * x;
    for (Eigen::Index j = 0; j < mb; ++j) out(mg + j) = bnd.sign[j] * x(bnd.source[j]);
    return out;
  };
  auto apply_transpose = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out = Ag.transpose() * v.head(mg);
    for (Eigen::Index j = 0; j < mb; ++j) out(bnd.source[j]) += bnd.sign[j] * v(mg + j);
    return out;
  };

  Eigen::VectorXd b(m), w(m);
  b << gen.rhs, bnd.rhs;
  w << gen.penalty, bnd.penalty;
  std::vector<bool> elastic(gen.elastic);
  elastic.insert(elastic.end(), bnd.elastic.begin(), bnd.elastic.end());
  Eigen::VectorXd el(m);  // 1 for elastic sides
  for (Eigen::Index j = 0; j < m; ++j) el(j) = elastic[j] ? 1.0 : 0.0;

  // Start inside the bounds, slacks absorbing any row residual.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = qp.lower(j), hi = qp.upper(j);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      x(j) = (lo <= 0.0 && 0.0 <= hi) ? std::clamp(0.0, lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
                                      : 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      x(j) = std::max(0.0, lo + 1.0);
    } else if (std::isfinite(hi)) {
      x(j) = std::min(0.0, hi - 1.0);
    }
  }
  const Eigen::VectorXd Ax0 = apply(x) - b;
  Eigen::VectorXd s(m), lam(m), e(m), mu(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (elastic[j]) {
      s(j) = std::max(Ax0(j), 0.0) + 1.0;
      e(j) = std::max(-Ax0(j), 0.0) + 1.0;
      lam(j) = std::min(1.0, 0.5 * w(j));
      mu(j) = w(j) - lam(j);
    } else {
      s(j) = std::max(Ax0(j), 1.0);
      e(j) = 0.0;
      lam(j) = 1.0;
      mu(j) = 0.0;
    }
  }
  const Eigen::VectorXd w_el = (el.array() > 0.0).select(w, 0.0);

  const double scale_p = 1.0 + (m > 0 ? b.lpNorm<Eigen::Infinity>() : 0.0);
  const double m_eff = static_cast<double>(m + (el.array() > 0.0).count());

  QpSolution sol;
  sol.status = QpStatus::MaxIterations;
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd best_x = x;
  Eigen::VectorXd best_lam = lam;
  double best_merit = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < settings.max_iterations; ++it) {
    sol.iterations = it;
    const Eigen::VectorXd r_d = qp.H * x + qp.c - apply_transpose(lam);
    const Eigen::VectorXd r_p = apply(x) + e.cwiseProduct(el) - s - b;
    const Eigen::VectorXd r_w = ((w_el - lam - mu).array() * el.array()).matrix();
    const double gap =
        m_eff > 0 ? (s.dot(lam) + (e.cwiseProduct(mu)).cwiseProduct(el).sum()) / m_eff : 0.0;

    const double res_d = r_d.lpNorm<Eigen::Infinity>();
    // Dual residual relative to the terms that cancel in it.
    const double scale_d = 1.0 + std::max({qp.c.lpNorm<Eigen::Infinity>(),
                                           (qp.H * x).lpNorm<Eigen::Infinity>(),
                                           apply_transpose(lam).lpNorm<Eigen::Infinity>()});
    const double res_p = m > 0 ? r_p.lpNorm<Eigen::Infinity>() : 0.0;
    const double merit = std::max({res_d / scale_d, res_p / scale_p, gap});
    if (merit <= settings.tolerance) {
      sol.status = QpStatus::Solved;
      break;
    }
    // Rounding eventually stops the residuals from shrinking; keep the best
    // iterate and give up once progress stalls.
    if (merit < 0.9 * best_merit) {
      best_merit = merit;
      best_x = x;
      best_lam = lam;
      stalled = 0;
    } else if (++stalled >= 4) {
      break;
    }

    // Diagonal of the condensed system and its factorization (shared by the
    // predictor and corrector solves).
    Eigen::VectorXd theta = s.cwiseQuotient(lam);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (elastic[j]) theta(j) += e(j) / mu(j);
    }
    const Eigen::VectorXd d = theta.cwiseInverse();
    M = qp.H;
    if (mg > 0) M.noalias() += Ag.transpose() * (d.head(mg).asDiagonal() * Ag);
    for (Eigen::Index j = 0; j < mb; ++j) M(bnd.source[j], bnd.source[j]) += d(mg + j);
    const double reg = 1e-12 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
    M.diagonal().array() += reg;
    const Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("solve_qp: condensed KKT matrix is not positive definite");
    }

    struct Step {
      Eigen::VectorXd x, lam, s, e, mu;
    };
    auto direction = [&](const Eigen::VectorXd& r_s, const Eigen::VectorXd& r_e) {
      Eigen::VectorXd q = -r_p - r_s.cwiseQuotient(lam);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (elastic[j]) q(j) += (r_e(j) + e(j) * r_w(j)) / mu(j);
      }
      Step st;
      st.x = llt.solve(-r_d + apply_transpose(d.cwiseProduct(q)));
      st.lam = d.cwiseProduct(q - apply(st.x));
      st.s = (-r_s - s.cwiseProduct(st.lam)).cwiseQuotient(lam);
      st.mu = Eigen::VectorXd::Zero(m);
      st.e = Eigen::VectorXd::Zero(m);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (elastic[j]) {
          st.mu(j) = r_w(j) - st.lam(j);
          st.e(j) = (-r_e(j) - e(j) * st.mu(j)) / mu(j);
        }
      }
      return st;
    };
    auto step_length = [&](const Step& st, double fraction) {
      double a = std::min(max_step(s, st.s, fraction), max_step(lam, st.lam, fraction));
      for (Eigen::Index j = 0; j < m; ++j) {
        if (!elastic[j]) continue;
        if (st.e(j) < 0.0) a = std::min(a, -fraction * e(j) / st.e(j));
        if (st.mu(j) < 0.0) a = std::min(a, -fraction * mu(j) / st.mu(j));
      }
      return a;
    };

    // Predictor (affine scaling).
    const Eigen::VectorXd rs_aff = s.cwiseProduct(lam);
    const Eigen::VectorXd re_aff = (e.cwiseProduct(mu)).cwiseProduct(el);
    const Step aff = direction(rs_aff, re_aff);
    const double a_aff = step_length(aff, 1.0);
    double gap_aff = 0.0;
    if (m_eff > 0) {
      gap_aff = ((s + a_aff * aff.s).dot(lam + a_aff * aff.lam) +
                 ((e + a_aff * aff.e).cwiseProduct(mu + a_aff * aff.mu)).cwiseProduct(el).sum()) /
                m_eff;
    }
    const double sigma = gap > 0.0 ? std::pow(std::clamp(gap_aff / gap, 0.0, 1.0), 3) : 0.0;

    // Corrector with centering.
    const Eigen::VectorXd rs =
        rs_aff + aff.s.cwiseProduct(aff.lam) - Eigen::VectorXd::Constant(m, sigma * gap);
    const Eigen::VectorXd re =
        ((re_aff + aff.e.cwiseProduct(aff.mu)).array() - sigma * gap).matrix().cwiseProduct(el);
    const Step st = direction(rs, re);
    const double a = step_length(st, 0.99);

    x += a * st.x;
    lam += a * st.lam;
    s += a * st.s;
    e += a * st.e.cwiseProduct(el);
    mu += a * st.mu.cwiseProduct(el);
    sol.iterations = it + 1;
  }
  if (sol.status != QpStatus::Solved) {
    x = best_x;
    lam = best_lam;
    if (best_merit <= settings.acceptable_tolerance) sol.status = QpStatus::Solved;
  }

  sol.x = x;
  const Eigen::Index rows = qp.A.rows();
  sol.row_multipliers = Eigen::VectorXd::Zero(rows);
  sol.row_violation = Eigen::VectorXd::Zero(rows);
  const Eigen::VectorXd Ax = qp.A * x;
  for (Eigen::Index j = 0; j < mg; ++j) sol.row_multipliers(gen.source[j]) += gen.sign[j] * lam(j);
  double penalty_cost = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double v = std::max({qp.row_lower(i) - Ax(i), Ax(i) - qp.row_upper(i), 0.0});
    if (std::isfinite(qp.row_penalty(i))) {
      sol.row_violation(i) = v;
      penalty_cost += qp.row_penalty(i) * v;
    } else if (v > 1e-6 * (1.0 + (m > 0 ? b.lpNorm<Eigen::Infinity>() : 0.0))) {
      sol.status = QpStatus::Infeasible;
    }
  }
  sol.bound_multipliers = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < mb; ++j) sol.bound_multipliers(bnd.source[j]) += bnd.sign[j] * lam(mg + j);
  sol.objective = 0.5 * x.dot(qp.H * x) + qp.c.dot(x) + penalty_cost;
  return sol;
}

}  // namespace clsid
