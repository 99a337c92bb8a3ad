#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "clsid/error.hpp"
#include "clsid/signals/channel_defaults.hpp"
#include "clsid/signals/filter.hpp"
#include "clsid/signals/io_record.hpp"
#include "clsid/signals/metrics.hpp"
#include "clsid/signals/signal.hpp"
#include "generators.hpp"

namespace clsid {
namespace {

using testing::tone_amplitude;

SignalSpec chirp_spec() {
  SignalSpec s;
  s.kind = SignalKind::Chirp;
  s.duration = 100.0;
  s.dt = 0.01;
  s.amplitude = {-0.2, 0.6};
  s.chirp_f0 = 0.0;
  s.chirp_f1 = 1.0;
  return s;
}

TEST(Chirp, Endpoints) {
  const auto s = chirp_spec();
  const auto x = generate(s);
  EXPECT_EQ(x.size(), s.sample_count());
  EXPECT_EQ(x.size(), 10001u);
  EXPECT_DOUBLE_EQ(x.front(), s.amplitude.mid());
  EXPECT_DOUBLE_EQ(chirp_frequency(0.0, 1.0, 100.0, 100.0), 1.0);
  EXPECT_DOUBLE_EQ(chirp_frequency(0.0, 1.0, 100.0, 0.0), 0.0);
  EXPECT_NEAR(chirp_time_at(0.0, 1.0, 100.0, 0.6), 60.0, 1e-12);
}

TEST(Chirp, StaysInsideAmplitudeBand) {
  const auto s = chirp_spec();
  for (double v : generate(s)) {
    EXPECT_GE(v, s.amplitude.lo - 1e-12);
    EXPECT_LE(v, s.amplitude.hi + 1e-12);
  }
}

TEST(Step, DegenerateRangeIsConstant) {
  SignalSpec s;
  s.kind = SignalKind::Step;
  s.duration = 30.0;
  s.dt = 0.01;
  s.amplitude = {0.5, 0.5};
  for (double v : generate(s)) EXPECT_EQ(v, 0.5);
}

TEST(Step, DwellsWithinHoldRange) {
  SignalSpec s;
  s.kind = SignalKind::Step;
  s.duration = 200.0;
  s.dt = 0.01;
  s.amplitude = {-1.0, 1.0};
  s.hold = {5.0, 20.0};
  s.seed = 3;
  const auto x = generate(s);
  std::size_t last = 0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (x[k] != x[k - 1]) {
      const double dwell = double(k - last) * s.dt;
      if (last > 0) {
        EXPECT_GE(dwell, s.hold.lo - s.dt);
        EXPECT_LE(dwell, s.hold.hi + s.dt);
      }
      last = k;
    }
  }
  EXPECT_GT(last, 0u);
}

TEST(Ramp, ContinuousBetweenLevels) {
  SignalSpec s;
  s.kind = SignalKind::Ramp;
  s.duration = 100.0;
  s.dt = 0.01;
  s.amplitude = {0.0, 1.0};
  s.seed = 11;
  const auto x = generate(s);
  double biggest = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) biggest = std::max(biggest, std::abs(x[k] - x[k - 1]));
  // Slope is at most span / shortest dwell.
  EXPECT_LE(biggest, 1.0 / 5.0 * s.dt + 1e-12);
  for (double v : x) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Generate, ReproduciblePerSeed) {
  SignalSpec s;
  s.kind = SignalKind::Ramp;
  s.duration = 50.0;
  s.seed = 42;
  EXPECT_EQ(generate(s), generate(s));
  SignalSpec t = s;
  t.seed = 43;
  EXPECT_NE(generate(s), generate(t));
}

TEST(Generate, ValidationNamesField) {
  SignalSpec s = chirp_spec();
  s.chirp_f1 = 60.0;
  try {
    generate(s);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("chirp_f1"), std::string::npos);
  }
  s = chirp_spec();
  s.duration = 0.0;
  EXPECT_THROW(generate(s), ValidationError);
  s = chirp_spec();
  s.amplitude = {1.0, 0.0};
  EXPECT_THROW(generate(s), ValidationError);
}

TEST(FitPercentage, IdentityAndMean) {
  const std::vector<double> a{0.3, -1.0, 2.5, 0.7, 1.1};
  EXPECT_EQ(fit_percentage(a, a), 100.0);
  double m = 0.0;
  for (double v : a) m += v;
  m /= double(a.size());
  const std::vector<double> mean(a.size(), m);
  EXPECT_NEAR(fit_percentage(a, mean), 0.0, 1e-13);
}

TEST(FitPercentage, HandEvaluated) {
  const std::vector<double> a{0, 1, 2, 3};
  const std::vector<double> p{0, 1, 2, 4};
  EXPECT_NEAR(fit_percentage(a, p), (1.0 - 1.0 / std::sqrt(5.0)) * 100.0, 1e-12);
  EXPECT_NEAR(fit_percentage(a, p), 55.28, 0.01);
}

TEST(FitPercentage, Errors) {
  const std::vector<double> c{1.0, 1.0, 1.0};
  EXPECT_THROW(fit_percentage(c, c), ExcitationError);
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0, 2.0, 3.0};
  EXPECT_THROW(fit_percentage(a, b), ValidationError);
}

TEST(Lowpass, ConstantPassesExactly) {
  const std::vector<double> x(5000, 0.98);
  for (double v : lowpass(x, 0.0005, 5.0)) EXPECT_NEAR(v, 0.98, 1e-6);
}

std::vector<double> sine(double f, double dt, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::sin(2.0 * M_PI * f * dt * double(k));
  return x;
}

// Forward-backward magnitude is the squared analog magnitude 1/(1+(f/fc)^4).
double two_pass_gain(double f, double fc) { return 1.0 / (1.0 + std::pow(f / fc, 4)); }

TEST(Lowpass, StopbandAndPassband) {
  const double dt = 0.001, fc = 2.0;
  const std::size_t n = 20000;
  const auto hi = lowpass(sine(10.0 * fc, dt, n), dt, fc);
  const auto lo = lowpass(sine(fc / 10.0, dt, n), dt, fc);
  const std::vector<double> hi_mid(hi.begin() + 2000, hi.end() - 2000);
  const std::vector<double> lo_mid(lo.begin() + 2000, lo.end() - 2000);
  const double a_hi = *std::max_element(hi_mid.begin(), hi_mid.end());
  const double a_lo = tone_amplitude(lo, dt, fc / 10.0);
  EXPECT_LT(a_hi, 0.1);
  EXPECT_NEAR(a_hi, two_pass_gain(10.0 * fc, fc), 2e-3);
  EXPECT_NEAR(a_lo, 1.0, 0.02);
}

TEST(Lowpass, RejectsCutoffOutsideBand) {
  const std::vector<double> x(100, 1.0);
  EXPECT_THROW(lowpass(x, 0.01, 0.0), ValidationError);
  EXPECT_THROW(lowpass(x, 0.01, 50.0), ValidationError);
}

TEST(ButterworthStateSpace, UnitDcGain) {
  const auto ss = butterworth_state_space(0.5);
  const Eigen::MatrixXd dc = -ss.C() * ss.A().inverse() * ss.B();
  EXPECT_NEAR(dc(0, 0), 1.0, 1e-12);
}

TEST(IoRecord, CsvRoundTrip) {
  Eigen::MatrixXd u(3, 4), y(3, 4);
  u << 0.1, 0.0, 0.98, 0.0, 0.2, 0.0, 0.98, 0.1, 0.3, -0.1, 0.9, 0.2;
  y = 0.5 * u;
  const auto rec = IoRecord::four_channel(0.0005, u, y);
  const std::string csv = to_csv(rec);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,u_vx,u_vy,u_z,u_wyaw,y_vx,y_vy,y_z,y_wyaw");
  EXPECT_NE(csv.find("\n0.000500,"), std::string::npos);
  std::istringstream is(csv);
  const auto back = read_csv(is);
  EXPECT_NEAR(back.dt, 0.0005, 1e-12);
  EXPECT_TRUE(back.u.isApprox(u, 1e-12));
  EXPECT_TRUE(back.y.isApprox(y, 1e-12));
  EXPECT_EQ(back.input_labels, rec.input_labels);
}

TEST(IoRecord, ValidationCatchesMismatch) {
  IoRecord rec = IoRecord::four_channel(0.01, Eigen::MatrixXd::Zero(5, 4), Eigen::MatrixXd::Zero(5, 4));
  rec.y = Eigen::MatrixXd::Zero(4, 4);
  EXPECT_THROW(rec.validate(), ValidationError);
  rec = IoRecord::four_channel(0.01, Eigen::MatrixXd::Zero(5, 4), Eigen::MatrixXd::Zero(5, 4));
  rec.output_labels[1] = "u_vx";
  EXPECT_THROW(rec.validate(), ValidationError);
}

TEST(Channels, NamesAndDefaults) {
  for (Channel c : kAllChannels) EXPECT_EQ(channel_from_string(channel_name(c)), c);
  EXPECT_THROW(channel_from_string("roll"), ValidationError);
  EXPECT_DOUBLE_EQ(nominal_command(Channel::Z), 0.98);
  EXPECT_DOUBLE_EQ(nominal_command(Channel::Vx), 0.0);
  EXPECT_FALSE(is_velocity_channel(Channel::Z));
}

}  // namespace
}  // namespace clsid
