#include "clsid/sysid/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "clsid/error.hpp"
#include "clsid/lti/analysis.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/lti/state_space.hpp"
#include "clsid/signals/metrics.hpp"
#include "clsid/sysid/prediction.hpp"

namespace clsid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Companion (control canonical) A of a monic polynomial given by its
// non-leading coefficients a_{n-1} ... a_0 (descending).
Eigen::MatrixXd companion_a(std::span<const double> den_tail) {
  const int n = static_cast<int>(den_tail.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
  for (int j = 0; j < n; ++j) A(n - 1, j) = -den_tail[n - 1 - j];
  return A;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

void FitConfig::validate() const {
  require(n_poles >= 1, "n_poles", "must be >= 1");
  require(n_zeros >= 0 && n_zeros < n_poles, "n_zeros", "need 0 <= n_zeros < n_poles");
  require(decimation >= 1, "decimation", "must be >= 1");
  require(max_iterations >= 1, "max_iterations", "must be >= 1");
  require(cost_tolerance > 0.0, "cost_tolerance", "must be > 0");
  require(gradient_tolerance > 0.0, "gradient_tolerance", "must be > 0");
  require(multistart >= 1, "multistart", "must be >= 1");
  require(kstep >= 0, "kstep", "must be >= 0");
}

FitConfig default_structure(Channel c) {
  FitConfig cfg;
  cfg.n_poles = 3;
  cfg.n_zeros = (c == Channel::Vx || c == Channel::Wyaw) ? 2 : 1;
  return cfg;
}

OutputErrorProblem::OutputErrorProblem(std::span<const double> u, std::span<const double> y,
                                       double dt, int decimation, int n_poles, int n_zeros)
    : dt_(dt), decimation_(decimation), n_poles_(n_poles), n_zeros_(n_zeros) {
  require(u.size() == y.size(), "y", "input and output lengths differ");
  require(dt > 0.0, "dt", "must be > 0");
  require(decimation >= 1, "decimation", "must be >= 1");
  require(n_poles >= 1 && n_zeros >= 0 && n_zeros < n_poles, "structure",
          "need 0 <= n_zeros < n_poles");
  require(!u.empty(), "u", "empty input");
  const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
  if (*mx - *mn <= 0.0) throw ExcitationError("fit_tf: input is constant (not exciting)");

  const Eigen::Index count = static_cast<Eigen::Index>((u.size() - 1) / decimation) + 1;
  const Eigen::Index need = 10 * (n_poles + n_zeros + 1);
  require(count >= need, "data",
          "needs at least " + std::to_string(need) + " samples after decimation");

  u0_ = u.front();
  v_.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) v_[k] = u[k] - u0_;
  measured_.resize(count);
  input_decimated_.resize(count);
  for (Eigen::Index q = 0; q < count; ++q) {
    measured_(q) = y[static_cast<std::size_t>(q * decimation)];
    input_decimated_(q) = u[static_cast<std::size_t>(q * decimation)];
  }
}

Eigen::VectorXd OutputErrorProblem::parameters(const TransferFunction& tf) const {
  require(tf.order() == n_poles_ && tf.num_degree() <= n_zeros_, "model",
          "structure does not match the problem");
  Eigen::VectorXd theta(parameter_count());
  const auto& num = tf.num();
  const int pad = n_zeros_ + 1 - static_cast<int>(num.size());
  for (int j = 0; j <= n_zeros_; ++j) theta(j) = j < pad ? 0.0 : num[j - pad];
  for (int j = 0; j < n_poles_; ++j) theta(n_zeros_ + 1 + j) = tf.den()[j + 1];
  return theta;
}

TransferFunction OutputErrorProblem::model(const Eigen::VectorXd& theta) const {
  Polynomial num(theta.data(), theta.data() + n_zeros_ + 1);
  Polynomial den(n_poles_ + 1);
  den[0] = 1.0;
  for (int j = 0; j < n_poles_; ++j) den[j + 1] = theta(n_zeros_ + 1 + j);
  return TransferFunction(num, den);
}

Eigen::MatrixXd OutputErrorProblem::block_states(const Eigen::MatrixXd& A,
                                                 const Eigen::VectorXd& B) const {
  const int q = static_cast<int>(A.rows());
  const StateSpaceModel cont(A, B, Eigen::MatrixXd::Zero(1, q), Eigen::MatrixXd::Zero(1, 1));
  const StateSpaceModel disc = c2d_zoh(cont, dt_);
  const Eigen::MatrixXd& Phi = disc.A();
  const Eigen::VectorXd Gamma = disc.B().col(0);

  // Over one decimation block: z+ = Phi^D z + sum_j Phi^{D-1-j} Gamma v_j.
  const int D = decimation_;
  Eigen::MatrixXd gains(q, D);
  gains.col(D - 1) = Gamma;
  for (int j = D - 2; j >= 0; --j) gains.col(j) = Phi * gains.col(j + 1);
  Eigen::MatrixXd PhiD = Phi;
  for (int j = 1; j < D; ++j) PhiD = Phi * PhiD;

  const Eigen::Index count = measured_.size();
  const auto N = static_cast<Eigen::Index>(v_.size());
  Eigen::MatrixXd states(count, q);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd acc(q);
  for (Eigen::Index r = 0; r < count; ++r) {
    states.row(r) = z.transpose();
    if (r + 1 == count) break;
    acc.noalias() = PhiD * z;
    const Eigen::Index base = r * D;
    const Eigen::Index len = std::min<Eigen::Index>(D, N - base);
    acc.noalias() += gains.leftCols(len) *
                     Eigen::Map<const Eigen::VectorXd>(v_.data() + base, len);
    z.swap(acc);
  }
  return states;
}

Eigen::VectorXd OutputErrorProblem::simulate(const Eigen::VectorXd& theta) const {
  const int n = n_poles_, m = n_zeros_;
  const double a0 = theta(m + 1 + n - 1);
  const double b0 = theta(m);
  if (u0_ != 0.0 && a0 == 0.0) {
    return Eigen::VectorXd::Constant(measured_.size(), std::numeric_limits<double>::quiet_NaN());
  }
  const double h0 = u0_ == 0.0 ? 0.0 : b0 / a0 * u0_;
  const Eigen::MatrixXd A = companion_a({theta.data() + m + 1, static_cast<std::size_t>(n)});
  Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
  B(n - 1) = 1.0;
  const Eigen::MatrixXd X = block_states(A, B);
  Eigen::VectorXd bvec = Eigen::VectorXd::Zero(n);
  for (int i = 0; i <= m; ++i) bvec(i) = theta(m - i);
  Eigen::VectorXd yhat = X * bvec;
  yhat.array() += h0;
  return yhat;
}

Eigen::VectorXd OutputErrorProblem::simulate(const Eigen::VectorXd& theta,
                                             Eigen::MatrixXd& jacobian) const {
  const int n = n_poles_, m = n_zeros_;
  const double a0 = theta(m + 1 + n - 1);
  const double b0 = theta(m);
  if (u0_ != 0.0 && a0 == 0.0) {
    jacobian.setZero(measured_.size(), parameter_count());
    return Eigen::VectorXd::Constant(measured_.size(), std::numeric_limits<double>::quiet_NaN());
  }
  const Eigen::MatrixXd A = companion_a({theta.data() + m + 1, static_cast<std::size_t>(n)});
  Eigen::VectorXd bvec = Eigen::VectorXd::Zero(n);
  for (int i = 0; i <= m; ++i) bvec(i) = theta(m - i);

  // Augmented system: x' = A x + e_n v drives y0 = b^T x, and xi' = A xi + e_n y0
  // yields s^i/den applied to y0 in xi_i, i.e. -d y / d a_i.
  Eigen::MatrixXd A2 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A2.topLeftCorner(n, n) = A;
  A2.bottomRightCorner(n, n) = A;
  A2.row(2 * n - 1).head(n) = bvec.transpose();
  Eigen::VectorXd B2 = Eigen::VectorXd::Zero(2 * n);
  B2(n - 1) = 1.0;
  const Eigen::MatrixXd Z = block_states(A2, B2);

  const double h0 = u0_ == 0.0 ? 0.0 : b0 / a0 * u0_;
  Eigen::VectorXd yhat = Z.leftCols(n) * bvec;
  yhat.array() += h0;

  jacobian.resize(measured_.size(), parameter_count());
  for (int i = 0; i <= m; ++i) {
    auto col = jacobian.col(m - i);
    col = Z.col(i);
    if (i == 0 && u0_ != 0.0) col.array() += u0_ / a0;
  }
  for (int i = 0; i < n; ++i) {
    auto col = jacobian.col(m + 1 + (n - 1 - i));
    col = -Z.col(n + i);
    if (i == 0 && u0_ != 0.0) col.array() -= b0 * u0_ / (a0 * a0);
  }
  return yhat;
}

TransferFunction OutputErrorProblem::fit_numerator(const Polynomial& den) const {
  const int n = n_poles_, m = n_zeros_;
  const Eigen::MatrixXd A = companion_a({den.data() + 1, static_cast<std::size_t>(n)});
  Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
  B(n - 1) = 1.0;
  const Eigen::MatrixXd X = block_states(A, B);
  const double a0 = den.back();
  Eigen::MatrixXd R(X.rows(), m + 1);
  for (int i = 0; i <= m; ++i) {
    R.col(i) = X.col(i);
    if (i == 0 && u0_ != 0.0 && a0 != 0.0) R.col(i).array() += u0_ / a0;
  }
  const Eigen::VectorXd b = R.colPivHouseholderQr().solve(measured_);
  Polynomial num(m + 1);
  for (int i = 0; i <= m; ++i) num[m - i] = std::isfinite(b(i)) ? b(i) : 0.0;
  return TransferFunction(num, den);
}

TransferFunction OutputErrorProblem::arx_initial_guess() const {
  const int n = n_poles_;
  const double T = sample_time();
  const Eigen::Index count = measured_.size();
  const Eigen::Index rows = count - n;
  Polynomial den;
  if (rows > 2 * n) {
    Eigen::MatrixXd Phi(rows, 2 * n);
    Eigen::VectorXd target(rows);
    for (Eigen::Index k = n; k < count; ++k) {
      for (int i = 1; i <= n; ++i) {
        Phi(k - n, i - 1) = -measured_(k - i);
        Phi(k - n, n + i - 1) = input_decimated_(k - i);
      }
      target(k - n) = measured_(k);
    }
    const Eigen::VectorXd theta = Phi.colPivHouseholderQr().solve(target);
    if (theta.allFinite()) {
      Polynomial zden(n + 1);
      zden[0] = 1.0;
      for (int i = 1; i <= n; ++i) zden[i] = theta(i - 1);
      std::vector<std::complex<double>> s_roots;
      const double max_rate = 10.0 / T;
      for (auto z : roots(zden)) {
        if (z.imag() == 0.0 && z.real() <= 0.0) z = std::abs(z.real());
        if (std::abs(z) < 1e-12) z = 1e-12;
        std::complex<double> s = std::log(z) / T;
        if (s.real() > 0.0) s.real(-s.real());
        if (s.real() < -max_rate) s.real(-max_rate);
        s_roots.push_back(s);
      }
      den = poly_from_roots(s_roots);
    }
  }
  if (den.empty() || !std::all_of(den.begin(), den.end(), [](double c) { return std::isfinite(c); })) {
    std::vector<std::complex<double>> fallback;
    for (int i = 0; i < n; ++i) fallback.emplace_back(-std::pow(2.0, i), 0.0);
    den = poly_from_roots(fallback);
  }
  return fit_numerator(den);
}

namespace {

struct StartOutcome {
  Eigen::VectorXd theta;
  double cost = kInf;
  double gradient_norm = kInf;
  int iterations = 0;
  bool converged = false;
};

double cost_of(const OutputErrorProblem& prob, const Eigen::VectorXd& theta,
               bool allow_unstable) {
  if (!theta.allFinite()) return kInf;
  if (!allow_unstable) {
    Polynomial den(prob.n_poles() + 1, 1.0);
    for (int j = 0; j < prob.n_poles(); ++j) den[j + 1] = theta(prob.n_zeros() + 1 + j);
    for (const auto& p : roots(den)) {
      if (p.real() >= 0.0) return kInf;
    }
  }
  const Eigen::VectorXd yhat = prob.simulate(theta);
  if (!all_finite(yhat)) return kInf;
  const double c = 0.5 * (prob.measured() - yhat).squaredNorm();
  return std::isfinite(c) ? c : kInf;
}

StartOutcome levenberg_marquardt(const OutputErrorProblem& prob, Eigen::VectorXd theta,
                                 const FitConfig& cfg, double perfect_cost) {
  StartOutcome out;
  double cost = cost_of(prob, theta, cfg.allow_unstable);
  if (!std::isfinite(cost)) return out;
  double lambda = 1e-3;
  Eigen::MatrixXd J;
  const int p = prob.parameter_count();
  for (int it = 0; it < cfg.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::VectorXd yhat = prob.simulate(theta, J);
    const Eigen::VectorXd r = prob.measured() - yhat;
    const Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    double gnorm = 0.0;
    for (int i = 0; i < p; ++i) {
      const double denom = std::sqrt(std::max(H(i, i), 1e-300) * 2.0 * std::max(cost, 1e-300));
      gnorm = std::max(gnorm, std::abs(g(i)) / denom);
    }
    out.gradient_norm = gnorm;
    if (cost <= perfect_cost || gnorm <= cfg.gradient_tolerance) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd Hd = H;
      for (int i = 0; i < p; ++i) Hd(i, i) += lambda * std::max(H(i, i), 1e-12);
      const Eigen::VectorXd step = Hd.ldlt().solve(g);
      const Eigen::VectorXd candidate = theta + step;
      const double c = cost_of(prob, candidate, cfg.allow_unstable);
      if (c < cost) {
        const double rel = (cost - c) / std::max(cost, 1e-300);
        theta = candidate;
        cost = c;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < cfg.cost_tolerance) it = cfg.max_iterations;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) break;
  }
  // Final gradient at the returned point.
  {
    const Eigen::VectorXd yhat = prob.simulate(theta, J);
    const Eigen::VectorXd r = prob.measured() - yhat;
    const Eigen::VectorXd g = J.transpose() * r;
    double gnorm = 0.0;
    for (int i = 0; i < p; ++i) {
      const double hii = J.col(i).squaredNorm();
      const double denom = std::sqrt(std::max(hii, 1e-300) * 2.0 * std::max(cost, 1e-300));
      gnorm = std::max(gnorm, std::abs(g(i)) / denom);
    }
    out.gradient_norm = gnorm;
    out.converged = cost <= perfect_cost || gnorm <= cfg.gradient_tolerance;
  }
  out.theta = theta;
  out.cost = cost;
  return out;
}

// Start with every right-half-plane pole mirrored into the left half plane
// and the numerator refitted, or nothing if the model has no such pole.
std::optional<Eigen::VectorXd> reflected_start(const OutputErrorProblem& prob,
                                               const Eigen::VectorXd& theta) {
  const TransferFunction tf = prob.model(theta);
  auto poles = roots(tf.den());
  bool any = false;
  for (auto& p : poles) {
    if (p.real() > 0.0) {
      p = {-p.real(), p.imag()};
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return prob.parameters(prob.fit_numerator(poly_from_roots(poles)));
}

}  // namespace

FitResult fit_tf(std::span<const double> u, std::span<const double> y, double dt,
                 const FitConfig& cfg, std::span<const TransferFunction> extra_starts) {
  cfg.validate();
  const OutputErrorProblem prob(u, y, dt, cfg.decimation, cfg.n_poles, cfg.n_zeros);

  const Eigen::VectorXd& meas = prob.measured();
  const double spread = (meas.array() - meas.mean()).matrix().squaredNorm();
  const double perfect_cost = 1e-24 * std::max(spread, 1e-300);

  std::vector<Eigen::VectorXd> starts;
  const TransferFunction arx = prob.arx_initial_guess();
  starts.push_back(prob.parameters(arx));
  for (const auto& tf : extra_starts) {
    if (tf.order() == cfg.n_poles && tf.num_degree() <= cfg.n_zeros) {
      starts.push_back(prob.parameters(tf));
    }
  }
  std::mt19937_64 rng(cfg.seed);
  for (int s = 1; s < cfg.multistart; ++s) {
    Polynomial den = arx.den();
    for (std::size_t j = 1; j < den.size(); ++j) {
      den[j] *= std::exp(0.2 * (2.0 * unit_uniform(rng) - 1.0));
    }
    starts.push_back(prob.parameters(prob.fit_numerator(den)));
  }

  StartOutcome best;
  int total_iterations = 0;
  auto run = [&](const Eigen::VectorXd& start) {
    StartOutcome o = levenberg_marquardt(prob, start, cfg, perfect_cost);
    total_iterations += o.iterations;
    std::optional<Eigen::VectorXd> reflected;
    if (std::isfinite(o.cost)) reflected = reflected_start(prob, o.theta);
    if (o.cost < best.cost) best = std::move(o);
    return reflected;
  };
  for (const auto& start : starts) {
    // A local minimum with right-half-plane poles is often a mirrored copy of
    // the stable one; restart once from the reflection.
    if (auto again = run(start)) run(*again);
  }
  if (!std::isfinite(best.cost)) {
    throw ConvergenceError("fit_tf: simulation diverged for all " +
                           std::to_string(starts.size()) + " starts (structure " +
                           std::to_string(cfg.n_poles) + "p/" + std::to_string(cfg.n_zeros) +
                           "z)");
  }

  FitResult result;
  result.model = prob.model(best.theta);
  const Eigen::VectorXd yhat = prob.simulate(best.theta);
  result.fit_percent = fit_percentage({meas.data(), static_cast<std::size_t>(meas.size())},
                                      {yhat.data(), static_cast<std::size_t>(yhat.size())});
  result.residual_norm = (meas - yhat).norm();
  result.gradient_norm = best.gradient_norm;
  result.iterations = total_iterations;
  result.converged = best.converged;

  const double T = prob.sample_time();
  for (const auto& p : roots(result.model.den())) {
    if (std::abs(p) * T > 1.0) {
      result.warnings.push_back(
          "fitted pole faster than the fitting sample rate; the data may need direct "
          "feedthrough, which a strictly proper model cannot represent");
      break;
    }
  }
  if (!poles_zeros(result.model).asymptotically_stable) {
    result.warnings.push_back("fitted model is not asymptotically stable");
  }

  result.kstep_fit_percent = std::numeric_limits<double>::quiet_NaN();
  if (cfg.kstep > 0) {
    result.kstep_fit_percent = k_step_predict(result.model, u, y, dt, cfg.kstep).fit_percent(0);
  }
  return result;
}

FitResult fit_tf(const IoRecord& rec, int channel, const FitConfig& cfg) {
  rec.validate();
  const auto u = rec.input(channel);
  const auto y = rec.output(channel);
  return fit_tf(u, y, rec.dt, cfg);
}

}  // namespace clsid
