#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "clsid/plant/profile.hpp"
#include "clsid/signals/io_record.hpp"
#include "clsid/signals/signal.hpp"

namespace clsid {

/// Random steps, then random ramps, then a chirp, back to back (the 500 s
/// identification layout by default).
struct LayoutSpec {
  Interval amplitude{0.0, 1.0};
  Interval hold{5.0, 20.0};
  double step_duration = 200.0;
  double ramp_duration = 200.0;
  double chirp_duration = 100.0;
  double chirp_f0 = 0.0;
  double chirp_f1 = 1.0;
  std::uint64_t seed = 0;

  double duration() const { return step_duration + ramp_duration + chirp_duration; }
  /// Time at which the chirp segment starts.
  double chirp_start() const { return step_duration + ramp_duration; }
};

/// Per-channel excitation: hold the nominal command, a single signal, or the
/// step/ramp/chirp layout.
using ChannelExcitation = std::variant<std::monostate, SignalSpec, LayoutSpec>;

struct ExperimentSpec {
  double dt = 0.0005;
  std::array<ChannelExcitation, 4> inputs{};
};

/// Samples of the layout at period @p dt; segments share their boundary
/// sample, so a 500 s layout at 2 kHz has 1,000,001 samples.
std::vector<double> generate_layout(const LayoutSpec& spec, double dt);

/// Command matrix (N x 4) for an experiment. All excited channels must have
/// the same sample count; unexcited channels hold their nominal command.
Eigen::MatrixXd experiment_commands(const ExperimentSpec& spec);

/// Drives a fresh surrogate plant with @p commands (N x 4) sampled at @p dt.
IoRecord run_commands(const PlantProfile& profile, const Eigen::MatrixXd& commands, double dt);

/// Deterministic given profile.seed and the excitation seeds.
IoRecord run_profile_experiment(const PlantProfile& profile, const ExperimentSpec& spec);

/// Layout excitation on @p channel with its default range, others nominal.
ExperimentSpec layout_experiment(Channel channel, double dt = 0.0005, std::uint64_t seed = 0);

}  // namespace clsid
