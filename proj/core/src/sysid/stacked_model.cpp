#include "clsid/sysid/stacked_model.hpp"

#include "clsid/error.hpp"
#include "clsid/lti/discretize.hpp"
#include "clsid/signals/io_record.hpp"

namespace clsid {

std::vector<int> StackedModel::offsets() const {
  std::vector<int> out;
  int at = 0;
  for (const auto& b : blocks) {
    out.push_back(at);
    at += b.states();
  }
  return out;
}

StackedModel stack_blocks(std::span<const TransferFunction> models) {
  if (models.empty()) throw StructuralError("stack_model: no channel models");
  std::vector<StateSpaceModel> blocks;
  blocks.reserve(models.size());
  for (const auto& tf : models) blocks.push_back(tf_to_ss_ccf(tf));
  StateSpaceModel combined = block_diagonal(blocks);
  return StackedModel{std::move(blocks), std::move(combined)};
}

StackedModel stack_model(std::span<const FitResult> per_channel) {
  if (per_channel.size() != kNumChannels) {
    throw StructuralError("stack_model: expected four channel fits (vx, vy, z, wyaw), got " +
                          std::to_string(per_channel.size()));
  }
  std::vector<TransferFunction> models;
  for (const auto& r : per_channel) models.push_back(r.model);
  return stack_blocks(models);
}

StateSpaceModel discretized(const StackedModel& model, double dt) {
  return c2d_zoh(model.combined, dt);
}

}  // namespace clsid
