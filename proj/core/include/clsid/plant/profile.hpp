#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "clsid/lti/transfer_function.hpp"

namespace clsid {

/// Configuration of the surrogate closed-loop plant. The LTI core is one
/// transfer function per channel (vx, vy, z, wyaw); the remaining fields
/// shape the distortions wrapped around it.
struct PlantProfile {
  std::string name = "cnn";
  std::array<TransferFunction, 4> core{
      TransferFunction{{1.0}, {1.0, 1.0}}, TransferFunction{{1.0}, {1.0, 1.0}},
      TransferFunction{{1.0}, {1.0, 1.0}}, TransferFunction{{1.0}, {1.0, 1.0}}};
  /// Amplitude (m/s, rad/s) of the stepping oscillation added to the vy and
  /// wyaw measurements.
  double osc_amplitude = 0.05;
  double osc_freq = 1.25;
  std::array<double, 4> noise_std{0.0, 0.0, 0.0, 0.0};
  /// Fraction of the rate-limit deficit removed from a velocity command.
  double hf_distortion_gain = 0.5;
  /// Share of each channel's rate-limit deficit leaked into the others.
  double coupling_gain = 0.15;
  /// Relative leak per source channel; by default only forward velocity
  /// leaks.
  std::array<double, 4> coupling_sources{1.0, 0.0, 0.0, 0.0};
  double cutoff = 0.6;
  /// Cubic input distortion around the nominal command.
  double cubic_gain = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Transfer functions of the well-trained policy's closed loop, in channel
/// order vx, vy, z, wyaw.
std::array<TransferFunction, 4> nominal_core();

/// "cnn", "mlp", "untrained" or "linear_only"; ValidationError otherwise.
PlantProfile make_profile(const std::string& name);

/// Mirrors the smallest-magnitude zero of @p tf into the right half plane,
/// keeping the DC gain and |H(jw)|.
TransferFunction reflect_slowest_zero(const TransferFunction& tf);

}  // namespace clsid
