// Randomized property checks. Each case is reproducible from its seed.
#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "clsid/estimation/kalman.hpp"
#include "clsid/lti/analysis.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/lti/simulate.hpp"
#include "clsid/signals/filter.hpp"
#include "clsid/signals/metrics.hpp"
#include "clsid/signals/signal.hpp"
#include "generators.hpp"

namespace clsid {
namespace {

using cd = std::complex<double>;
using testing::Gen;

constexpr int kTrials = 100;

// Greedy nearest matching; both lists must have equal size.
double max_matched_relative_gap(std::vector<cd> a, std::vector<cd> b) {
  double worst = 0.0;
  for (const cd& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](cd p, cd q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x) / std::max(1.0, std::abs(x)));
    b.erase(it);
  }
  return worst;
}

std::vector<cd> eig(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  return {es.eigenvalues().data(), es.eigenvalues().data() + A.rows()};
}

TEST(Property, ZohEigenvalueMap) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(1000 + t);
    const int n = g.integer(1, 6);
    const auto ss = g.stable_ss(n, 1, 1);
    const double dt = g.uniform(1e-4, 0.5);
    std::vector<cd> expected;
    for (const cd& l : eig(ss.A())) expected.push_back(std::exp(l * dt));
    const auto d = c2d_zoh(ss, dt);
    EXPECT_LE(max_matched_relative_gap(expected, eig(d.A())), 1e-9) << "seed " << 1000 + t;
    EXPECT_EQ(d.C(), ss.C());
    EXPECT_EQ(d.D(), ss.D());
  }
}

TEST(Property, HsvSimilarityInvariance) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(2000 + t);
    const int n = g.integer(1, 6);
    const auto ss = g.stable_ss(n, g.integer(1, 2), g.integer(1, 2));
    const auto a = hankel_singular_values(ss);
    const auto b = hankel_singular_values(similarity_transform(ss, g.invertible(n)));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-8 * std::max(1.0, a[0])) << "seed " << 2000 + t;
    }
  }
}

TEST(Property, CcfPolesAreDenominatorRoots) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(3000 + t);
    const int np = g.integer(1, 6);
    const auto tf = g.stable_tf(np, g.integer(0, np - 1));
    EXPECT_LE(max_matched_relative_gap(roots(tf.den()), eig(tf_to_ss_ccf(tf).A())), 1e-7);
  }
}

TEST(Property, RootsRecoverConstructedPolynomial) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(4000 + t);
    const auto r = g.stable_roots(g.integer(1, 6));
    const Polynomial p = poly_from_roots(r);
    EXPECT_LE(max_matched_relative_gap(r, roots(p)), 1e-8) << "seed " << 4000 + t;
  }
}

TEST(Property, SimulationIsLinear) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(5000 + t);
    const int n = g.integer(1, 5), m = g.integer(1, 3), p = g.integer(1, 3);
    const auto d = c2d_zoh(g.stable_ss(n, m, p), 0.05);
    const Eigen::MatrixXd u1 = g.matrix(60, m), u2 = g.matrix(60, m);
    const Eigen::VectorXd x1 = g.vector(n), x2 = g.vector(n);
    const double a = g.normal(), b = g.normal();
    const Eigen::MatrixXd lhs = simulate_lti(d, a * u1 + b * u2, a * x1 + b * x2);
    const Eigen::MatrixXd rhs = a * simulate_lti(d, u1, x1) + b * simulate_lti(d, u2, x2);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
}

TEST(Property, FrequencyResponseBoundedByGridPeak) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(6000 + t);
    const int np = g.integer(1, 5);
    const auto tf = g.stable_tf(np, g.integer(0, np - 1));
    std::vector<double> grid;
    for (int i = 0; i <= 4000; ++i) grid.push_back(1e-3 * std::pow(10.0, 6.0 * i / 4000.0));
    grid.insert(grid.begin(), 0.0);
    double peak = 0.0;
    for (const cd& h : frequency_response(tf, grid)) peak = std::max(peak, std::abs(h));
    std::vector<double> probe;
    for (int i = 0; i < 50; ++i) probe.push_back(std::pow(10.0, g.uniform(-3.0, 3.0)));
    for (const cd& h : frequency_response(tf, probe)) EXPECT_LE(std::abs(h), peak * (1.0 + 1e-3));
  }
}

TEST(Property, FitPercentageIdentityAndShift) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(7000 + t);
    const int n = g.integer(2, 200);
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = g.normal();
      b[i] = a[i] + 0.3 * g.normal();
    }
    EXPECT_EQ(fit_percentage(a, a), 100.0);
    const double c = g.uniform(-10.0, 10.0);
    std::vector<double> as(a), bs(b);
    for (int i = 0; i < n; ++i) {
      as[i] += c;
      bs[i] += c;
    }
    EXPECT_NEAR(fit_percentage(as, bs), fit_percentage(a, b), 1e-9);
    EXPECT_LT(fit_percentage(a, b), 100.0);
  }
}

TEST(Property, GenerateIsPureAndChirpBounded) {
  for (int t = 0; t < kTrials; ++t) {
    Gen g(8000 + t);
    SignalSpec s;
    s.kind = static_cast<SignalKind>(g.integer(0, 2));
    s.dt = g.uniform(0.001, 0.05);
    s.duration = g.uniform(1.0, 60.0);
    const double lo = g.uniform(-2.0, 1.0);
    s.amplitude = {lo, lo + g.uniform(0.0, 2.0)};
    s.hold = {g.uniform(0.5, 2.0), g.uniform(2.0, 8.0)};
    s.chirp_f0 = g.uniform(0.0, 1.0);
    s.chirp_f1 = s.chirp_f0 + g.uniform(0.0, 2.0);
    s.seed = static_cast<std::uint64_t>(t);
    const auto x = generate(s);
    EXPECT_EQ(x, generate(s));
    EXPECT_EQ(x.size(), s.sample_count());
    for (double v : x) {
      EXPECT_GE(v, s.amplitude.lo - 1e-12);
      EXPECT_LE(v, s.amplitude.hi + 1e-12);
    }
  }
}

TEST(Property, RepeatedLowpassNeverAmplifies) {
  for (int t = 0; t < 30; ++t) {
    Gen g(9000 + t);
    const double dt = 0.01, fc = g.uniform(0.2, 5.0), f = g.uniform(0.05, 20.0);
    std::vector<double> x(4000);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::sin(2.0 * M_PI * f * dt * double(k));
    const auto once = lowpass(x, dt, fc);
    const auto twice = lowpass(once, dt, fc);
    const double a1 = testing::tone_amplitude(once, dt, f);
    const double a2 = testing::tone_amplitude(twice, dt, f);
    EXPECT_LE(a2, a1 + 1e-3) << "f " << f << " fc " << fc;
    EXPECT_LE(a1, 1.0 + 1e-3);
  }
}

TEST(Property, KalmanCovariancePsdOverLongRun) {
  Gen g(10000);
  const int n = 4, p = 2;
  KalmanConfig cfg;
  cfg.process_noise = g.psd(n, 0.01);
  cfg.measurement_noise = g.psd(p, 0.01) + 1e-4 * Eigen::MatrixXd::Identity(p, p);
  cfg.initial_covariance = g.psd(n);
  const auto ss = c2d_zoh(g.stable_ss(n, 1, p), 0.05);
  auto est = EstimatorState::initial(Eigen::VectorXd::Zero(n), cfg);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    est = predict(est, ss, g.vector(1), cfg);
    if (g.uniform(0.0, 1.0) < 0.7) est = update(est, ss, g.vector(p), cfg);
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(est.covariance).eigenvalues().minCoeff();
    worst = std::min(worst, lo);
  }
  EXPECT_GE(worst, -1e-10);
}

}  // namespace
}  // namespace clsid
