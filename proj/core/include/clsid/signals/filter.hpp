#pragma once

#include <array>
#include <span>
#include <vector>

#include "clsid/lti/state_space.hpp"

namespace clsid {

/// Digital second-order Butterworth low-pass (bilinear transform with
/// prewarping), run causally one sample at a time.
class ButterworthLowpass {
 public:
  ButterworthLowpass(double dt, double cutoff_hz);

  /// Places the filter at steady state for a constant input @p value.
  void reset(double value);
  double process(double x);

 private:
  std::array<double, 3> b_{};
  std::array<double, 3> a_{};  // a_[0] == 1
  double z1_ = 0.0;
  double z2_ = 0.0;
};

/// Zero-phase second-order Butterworth (forward then backward pass), each
/// pass started at steady state of the edge sample so that DC passes exactly.
/// Throws ValidationError unless 0 < cutoff_hz < 1/(2 dt).
std::vector<double> lowpass(std::span<const double> x, double dt, double cutoff_hz);

/// Continuous-time second-order Butterworth w^2/(s^2 + sqrt(2) w s + w^2) as a
/// single-channel state-space model.
StateSpaceModel butterworth_state_space(double cutoff_hz);

}  // namespace clsid
