#pragma once

#include <array>
#include <random>

#include <Eigen/Core>

#include "clsid/lti/state_space.hpp"
#include "clsid/plant/profile.hpp"

namespace clsid {

struct PlantState {
  std::array<Eigen::VectorXd, 4> x;
  /// Rate-limited command of each channel after the previous step.
  Eigen::Vector4d limited_command = Eigen::Vector4d::Zero();
  double time = 0.0;
  long long steps = 0;
  std::mt19937_64 rng;
  bool initialized = false;
};

struct PlantOutput {
  Eigen::Vector4d measured;  // with oscillation and sensor noise
  Eigen::Vector4d truth;     // LTI core output before sensor effects
  Eigen::Vector4d applied;   // command after distortion, as fed to the core
};

/// Surrogate closed-loop plant sampled every dt seconds. Sample k returns
/// the output at time k*dt and then applies command u_k over the following
/// interval. The first step places every channel at equilibrium for its
/// first command unless reset() was called.
class SurrogatePlant {
 public:
  SurrogatePlant(PlantProfile profile, double dt);

  void reset(const Eigen::Vector4d& command);
  PlantOutput step(const Eigen::Vector4d& command);

  const PlantProfile& profile() const { return profile_; }
  const PlantState& state() const { return state_; }
  double dt() const { return dt_; }

 private:
  Eigen::Vector4d distort(const Eigen::Vector4d& command);

  PlantProfile profile_;
  double dt_;
  std::array<StateSpaceModel, 4> models_;
  PlantState state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace clsid
