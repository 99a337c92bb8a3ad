#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "clsid/error.hpp"
#include "clsid/lti/analysis.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/lti/simulate.hpp"
#include "clsid/plant/experiment.hpp"
#include "clsid/plant/profile.hpp"
#include "clsid/signals/signal.hpp"
#include "clsid/sysid/decoupling.hpp"
#include "clsid/sysid/fit.hpp"
#include "clsid/sysid/linearity.hpp"
#include "clsid/sysid/order_selection.hpp"
#include "clsid/sysid/prediction.hpp"
#include "clsid/sysid/stacked_model.hpp"
#include "generators.hpp"

namespace clsid {
namespace {

using testing::Gen;

constexpr double kDt = 0.005;

std::vector<double> chirp_input(double duration = 100.0, double dt = kDt) {
  SignalSpec s;
  s.kind = SignalKind::Chirp;
  s.duration = duration;
  s.dt = dt;
  s.amplitude = {-0.5, 0.5};
  return generate(s);
}

std::vector<double> step_input(std::uint64_t seed) {
  SignalSpec s;
  s.kind = SignalKind::Step;
  s.duration = 100.0;
  s.dt = kDt;
  s.amplitude = {-1.0, 1.0};
  s.hold = {2.0, 6.0};
  s.seed = seed;
  return generate(s);
}

FitConfig quick(int poles, int zeros) {
  FitConfig cfg;
  cfg.n_poles = poles;
  cfg.n_zeros = zeros;
  cfg.decimation = 2;
  cfg.kstep = 0;
  return cfg;
}

TEST(FitTf, RecoversSagittalModel) {
  const auto truth = nominal_core()[0];
  const auto u = chirp_input();
  const auto y = simulate_tf(truth, u, kDt);
  const auto r = fit_tf(u, y, kDt, quick(3, 2));
  EXPECT_GE(r.fit_percent, 99.0);
  auto est = roots(r.model.den());
  auto ref = roots(truth.den());
  for (const auto& p : ref) {
    double best = 1e9;
    for (const auto& q : est) best = std::min(best, std::abs(p - q) / std::abs(p));
    EXPECT_LT(best, 0.01);
  }
}

TEST(FitTf, FirstOrderExact) {
  const TransferFunction truth({2.0}, {1.0, 0.7});
  const auto u = step_input(1);
  const auto y = simulate_tf(truth, u, kDt);
  const auto r = fit_tf(u, y, kDt, quick(1, 0));
  EXPECT_GT(r.fit_percent, 99.99);
  EXPECT_NEAR(r.model.den()[1], 0.7, 1e-4);
  EXPECT_NEAR(r.model.num()[0], 2.0, 1e-4);
}

TEST(FitTf, ConstantInputIsNotExciting) {
  const std::vector<double> u(2000, 0.3), y(2000, 0.1);
  EXPECT_THROW(fit_tf(u, y, kDt, quick(2, 0)), ExcitationError);
}

TEST(FitTf, TooFewSamplesRejected) {
  const std::vector<double> u{0, 1, 0, 1, 0, 1}, y{0, 1, 0, 1, 0, 1};
  EXPECT_THROW(fit_tf(u, y, kDt, quick(3, 2)), ValidationError);
}

TEST(FitTf, PureGainFlagged) {
  const auto u = step_input(5);
  std::vector<double> y(u.size());
  std::transform(u.begin(), u.end(), y.begin(), [](double v) { return 2.0 * v; });
  const auto r = fit_tf(u, y, kDt, quick(1, 0));
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_GT(r.fit_percent, 90.0);
}

TEST(OutputError, JacobianMatchesFiniteDifferences) {
  Gen g(17);
  const auto truth = nominal_core()[0];
  const auto u = chirp_input(30.0);
  const auto y = simulate_tf(truth, u, kDt);
  const OutputErrorProblem prob(u, y, kDt, 4, 3, 2);
  const Eigen::VectorXd base = prob.parameters(truth);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd theta = base;
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) *= std::exp(g.uniform(-0.2, 0.2));
    Eigen::MatrixXd J;
    prob.simulate(theta, J);
    Eigen::MatrixXd fd(J.rows(), J.cols());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(theta(i)));
      Eigen::VectorXd tp = theta, tm = theta;
      tp(i) += h;
      tm(i) -= h;
      fd.col(i) = (prob.simulate(tp) - prob.simulate(tm)) / (2.0 * h);
    }
    for (Eigen::Index i = 0; i < J.cols(); ++i) {
      EXPECT_LT((J.col(i) - fd.col(i)).norm(), 1e-5 * J.col(i).norm()) << "trial " << trial;
    }
  }
}

TEST(SelectOrder, FirstOrderPlant) {
  const TransferFunction truth({1.5}, {1.0, 2.0});
  const auto u = step_input(2);
  const auto y = simulate_tf(truth, u, kDt);
  FitConfig base = quick(1, 0);
  base.multistart = 2;
  const auto sel = select_order(u, y, kDt, 3, base);
  EXPECT_EQ(sel.n_poles, 1);
  EXPECT_EQ(sel.n_zeros, 0);
  EXPECT_EQ(sel.hsv.size() >= 1, true);
}

TEST(SelectOrder, AddingPolesNeverLowersBestFit) {
  const auto truth = nominal_core()[1];
  const auto u = step_input(4);
  auto y = simulate_tf(truth, u, kDt);
  Gen g(4);
  for (double& v : y) v += 0.01 * g.normal();
  FitConfig base = quick(1, 0);
  base.multistart = 2;
  const auto sel = select_order(u, y, kDt, 4, base);
  double previous = -1e9;
  for (int np = 1; np <= 4; ++np) {
    double best = -1e9;
    for (const auto& c : sel.table) {
      if (c.n_poles == np) best = std::max(best, c.fit_percent);
    }
    EXPECT_GE(best, previous - 1e-6) << np << " poles";
    previous = best;
  }
  EXPECT_EQ(sel.table.size(), 10u);
  EXPECT_THROW(select_order(u, y, kDt, 7, base), ValidationError);
}

TEST(KStep, SelfConsistentDataPredictsExactly) {
  const auto tf = nominal_core()[3];
  const auto u = chirp_input(50.0);
  const auto y = simulate_tf(tf, u, kDt);
  const auto p = k_step_predict(tf, u, y, kDt, 5);
  EXPECT_GE(p.fit_percent(0), 99.9);
  EXPECT_TRUE(std::isnan(p.predicted(0, 0)));
}

TEST(KStep, ShorterHorizonNoWorse) {
  const auto tf = nominal_core()[0];
  const auto u = step_input(9);
  Gen g(9);
  // A wrong model on clean data: open-loop error accumulates with the horizon.
  for (int trial = 0; trial < 5; ++trial) {
    const TransferFunction model({g.uniform(0.3, 0.7), 6.0, 8.0}, {1.0, 6.0, g.uniform(10.0, 13.0), 8.0});
    const auto y = simulate_tf(tf, u, kDt);
    const double k1 = k_step_predict(model, u, y, kDt, 1, 0.02).fit_percent(0);
    const double k5 = k_step_predict(model, u, y, kDt, 5, 0.02).fit_percent(0);
    EXPECT_GE(k1, k5);
  }
}

TEST(KStep, RejectsBadHorizon) {
  const auto tf = nominal_core()[0];
  const auto u = chirp_input(5.0);
  EXPECT_THROW(k_step_predict(tf, u, u, kDt, 0), ValidationError);
}

TEST(StackModel, NominalBlocks) {
  std::vector<FitResult> fits(4);
  const auto core = nominal_core();
  for (int c = 0; c < 4; ++c) fits[c].model = core[c];
  const auto st = stack_model(fits);
  EXPECT_EQ(st.combined.states(), 12);
  EXPECT_EQ(st.combined.inputs(), 4);
  EXPECT_EQ(st.combined.outputs(), 4);
  EXPECT_EQ(st.offsets(), (std::vector<int>{0, 3, 6, 9}));
  // Off-diagonal blocks are exactly zero.
  for (int b = 0; b < 4; ++b) {
    for (int c = 0; c < 4; ++c) {
      if (b == c) continue;
      EXPECT_EQ(st.combined.A().block(3 * b, 3 * c, 3, 3).cwiseAbs().maxCoeff(), 0.0);
    }
  }
  fits.pop_back();
  EXPECT_THROW(stack_model(fits), StructuralError);
}

TEST(StackModel, MatchesPerBlockSimulation) {
  Gen g(21);
  const auto core = nominal_core();
  const auto st = stack_blocks(std::vector<TransferFunction>(core.begin(), core.end()));
  const auto d = discretized(st, 0.01);
  const Eigen::MatrixXd u = g.matrix(500, 4);
  const Eigen::MatrixXd y = simulate_lti(d, u);
  for (int c = 0; c < 4; ++c) {
    const auto block = c2d_zoh(st.blocks[c], 0.01);
    const Eigen::MatrixXd yc = simulate_lti(block, u.col(c));
    EXPECT_LE((y.col(c) - yc.col(0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(StackModel, SingleBlockIsIdentity) {
  const auto tf = nominal_core()[2];
  const auto st = stack_blocks(std::vector<TransferFunction>{tf});
  const auto lone = tf_to_ss_ccf(tf);
  EXPECT_EQ(st.combined.A(), lone.A());
  EXPECT_EQ(st.combined.B(), lone.B());
  EXPECT_EQ(st.combined.C(), lone.C());
}

TEST(Linearity, LinearPlantHasNoGap) {
  const auto profile = make_profile("linear_only");
  LayoutSpec layout;
  layout.amplitude = {-0.3, 0.6};
  layout.step_duration = 40.0;
  layout.ramp_duration = 40.0;
  layout.chirp_duration = 100.0;
  ExperimentSpec spec;
  spec.dt = kDt;
  spec.inputs[0] = layout;
  const auto rec = run_profile_experiment(profile, spec);
  const auto r = linearity_report(rec, 0, profile.core[0], 0.6,
                                  {layout.chirp_start(), layout.chirp_duration, 0.0, 1.0});
  EXPECT_LT(std::abs(r.gap()), 5.0);
  EXPECT_NEAR(r.split_time, layout.chirp_start() + 60.0, kDt);
  EXPECT_THROW(linearity_report(rec, 0, profile.core[0], 1.5,
                                {layout.chirp_start(), layout.chirp_duration, 0.0, 1.0}),
               RangeError);
}

TEST(Decoupling, IndependentWithoutCoupling) {
  PlantProfile profile = make_profile("cnn");
  profile.coupling_gain = 0.0;
  const PlantRunner run = [&](const Eigen::MatrixXd& u, double dt) {
    return run_commands(profile, u, dt);
  };
  DecouplingConfig cfg;
  cfg.dt = kDt;
  const auto r = decoupling_test(run, Channel::Vy, Channel::Vx, cfg);
  EXPECT_EQ(r.verdict, Verdict::Independent);
  EXPECT_LT(std::abs(r.drop()), 5.0);
  ASSERT_TRUE(r.below_cutoff_percent.has_value());
  EXPECT_THROW(decoupling_test(run, Channel::Vx, Channel::Vx, cfg), ValidationError);
}

TEST(Decoupling, VerdictFollowsThreshold) {
  PlantProfile profile = make_profile("cnn");
  profile.coupling_gain = 10.0;
  const PlantRunner run = [&](const Eigen::MatrixXd& u, double dt) {
    return run_commands(profile, u, dt);
  };
  DecouplingConfig cfg;
  cfg.dt = kDt;
  const auto r = decoupling_test(run, Channel::Z, Channel::Vx, cfg);
  EXPECT_EQ(r.verdict == Verdict::Independent, r.drop() <= cfg.drop_threshold);
  EXPECT_EQ(r.verdict, Verdict::Coupled);
}

}  // namespace
}  // namespace clsid
