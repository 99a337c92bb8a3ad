#include "clsid/plant/surrogate_plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clsid/error.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/signals/channel_defaults.hpp"

namespace clsid {

namespace {

std::array<StateSpaceModel, 4> discretize_core(const PlantProfile& p, double dt) {
  auto disc = [&](int c) { return c2d_zoh(tf_to_ss_ccf(p.core[c]), dt); };
  return {disc(0), disc(1), disc(2), disc(3)};
}

}  // namespace

SurrogatePlant::SurrogatePlant(PlantProfile profile, double dt)
    : profile_((profile.validate(), std::move(profile))),
      dt_((require(dt > 0.0, "dt", "must be > 0"), dt)),
      models_(discretize_core(profile_, dt_)) {
  state_.rng.seed(profile_.seed);
}

void SurrogatePlant::reset(const Eigen::Vector4d& command) {
  state_.rng.seed(profile_.seed);
  normal_.reset();
  state_.time = 0.0;
  state_.steps = 0;
  state_.limited_command = command;
  for (int c = 0; c < kNumChannels; ++c) {
    state_.x[c] = models_[c].equilibrium(Eigen::VectorXd::Constant(1, command(c)));
  }
  state_.initialized = true;
}

Eigen::Vector4d SurrogatePlant::distort(const Eigen::Vector4d& command) {
  const PlantProfile& p = profile_;
  Eigen::Vector4d shaped = command;
  for (Channel ch : kAllChannels) {
    const int c = index(ch);
    const double dev = command(c) - nominal_command(ch);
    shaped(c) += p.cubic_gain * dev * dev * dev;
  }

  // Velocity commands cannot change faster than the gait allows: the part of
  // each increment beyond r_max is (partly) lost and spills into the other
  // channels. Height is exempt.
  Eigen::Vector4d deficit = Eigen::Vector4d::Zero();
  Eigen::Vector4d applied = shaped;
  for (Channel ch : kAllChannels) {
    const int c = index(ch);
    if (!is_velocity_channel(ch)) {
      state_.limited_command(c) = shaped(c);
      continue;
    }
    const double max_step = 2.0 * p.cutoff * channel_span(ch) * dt_;
    const double prev = state_.limited_command(c);
    const double limited = prev + std::clamp(shaped(c) - prev, -max_step, max_step);
    state_.limited_command(c) = limited;
    deficit(c) = shaped(c) - limited;
    applied(c) = shaped(c) - p.hf_distortion_gain * deficit(c);
  }
  if (p.coupling_gain > 0.0) {
    for (Channel src : kAllChannels) {
      const int s = index(src);
      const double leak = p.coupling_gain * p.coupling_sources[s] * deficit(s) / channel_span(src);
      if (leak == 0.0) continue;
      for (Channel dst : kAllChannels) {
        const int d = index(dst);
        if (d == s) continue;
        applied(d) += leak * channel_span(dst);
      }
    }
  }
  return applied;
}

PlantOutput SurrogatePlant::step(const Eigen::Vector4d& command) {
  if (!state_.initialized) reset(command);
  PlantOutput out;
  for (int c = 0; c < kNumChannels; ++c) {
    out.truth(c) = (models_[c].C() * state_.x[c])(0);
  }
  const double osc = profile_.osc_amplitude *
                     std::sin(2.0 * std::numbers::pi * profile_.osc_freq * state_.time);
  out.measured = out.truth;
  out.measured(index(Channel::Vy)) += osc;
  out.measured(index(Channel::Wyaw)) += osc;
  for (int c = 0; c < kNumChannels; ++c) {
    const double draw = normal_(state_.rng);
    out.measured(c) += profile_.noise_std[c] * draw;
  }

  out.applied = distort(command);
  for (int c = 0; c < kNumChannels; ++c) {
    state_.x[c] = models_[c].A() * state_.x[c] + models_[c].B().col(0) * out.applied(c);
  }
  ++state_.steps;
  state_.time = static_cast<double>(state_.steps) * dt_;
  return out;
}

}  // namespace clsid
