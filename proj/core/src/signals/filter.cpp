#include "clsid/signals/filter.hpp"

#include <cmath>
#include <numbers>

#include "clsid/error.hpp"

namespace clsid {

ButterworthLowpass::ButterworthLowpass(double dt, double cutoff_hz) {
  require(dt > 0.0, "dt", "must be > 0");
  require(cutoff_hz > 0.0 && cutoff_hz < 0.5 / dt, "cutoff",
          "must satisfy 0 < fc < 1/(2 dt)");
  // Prewarped bilinear transform of w^2 / (s^2 + sqrt2 w s + w^2).
  const double k = std::tan(std::numbers::pi * cutoff_hz * dt);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
  b_ = {k2 * norm, 2.0 * k2 * norm, k2 * norm};
  a_ = {1.0, 2.0 * (k2 - 1.0) * norm, (1.0 - std::numbers::sqrt2 * k + k2) * norm};
}

void ButterworthLowpass::reset(double value) {
  // Transposed direct form II steady state for constant input/output value.
  z1_ = value * (1.0 - b_[0]);
  z2_ = value * (b_[2] - a_[2]);
}

double ButterworthLowpass::process(double x) {
  const double y = b_[0] * x + z1_;
  z1_ = b_[1] * x - a_[1] * y + z2_;
  z2_ = b_[2] * x - a_[2] * y;
  return y;
}

std::vector<double> lowpass(std::span<const double> x, double dt, double cutoff_hz) {
  require(dt > 0.0, "dt", "must be > 0");
  require(cutoff_hz > 0.0 && cutoff_hz < 0.5 / dt, "cutoff",
          "must satisfy 0 < fc < 1/(2 dt)");
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  ButterworthLowpass fwd(dt, cutoff_hz);
  fwd.reset(out.front());
  for (double& v : out) v = fwd.process(v);
  ButterworthLowpass bwd(dt, cutoff_hz);
  bwd.reset(out.back());
  for (auto it = out.rbegin(); it != out.rend(); ++it) *it = bwd.process(*it);
  return out;
}

StateSpaceModel butterworth_state_space(double cutoff_hz) {
  require(cutoff_hz > 0.0, "cutoff", "must be > 0");
  const double w = 2.0 * std::numbers::pi * cutoff_hz;
  return tf_to_ss_ccf(TransferFunction({w * w}, {1.0, std::numbers::sqrt2 * w, w * w}));
}

}  // namespace clsid
