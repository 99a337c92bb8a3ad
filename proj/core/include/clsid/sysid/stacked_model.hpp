#pragma once

#include <span>
#include <vector>

#include "clsid/lti/state_space.hpp"
#include "clsid/lti/transfer_function.hpp"
#include "clsid/sysid/fit.hpp"

namespace clsid {

/// Per-channel control canonical blocks and their block-diagonal assembly
/// (one input and one output per block, in block order).
struct StackedModel {
  std::vector<StateSpaceModel> blocks;
  StateSpaceModel combined;

  /// First state index of each block inside the combined model.
  std::vector<int> offsets() const;
};

/// Stacks any non-empty list of channel models.
StackedModel stack_blocks(std::span<const TransferFunction> models);

/// Stacks the four channel fits (vx, vy, z, wyaw); StructuralError unless
/// exactly four are given.
StackedModel stack_model(std::span<const FitResult> per_channel);

/// ZOH discretization of the combined model.
StateSpaceModel discretized(const StackedModel& model, double dt);

}  // namespace clsid
