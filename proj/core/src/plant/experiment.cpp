#include "clsid/plant/experiment.hpp"

#include "clsid/error.hpp"
#include "clsid/plant/surrogate_plant.hpp"
#include "clsid/signals/channel_defaults.hpp"

namespace clsid {

std::vector<double> generate_layout(const LayoutSpec& spec, double dt) {
  require(spec.step_duration > 0.0 && spec.ramp_duration > 0.0 && spec.chirp_duration > 0.0,
          "layout", "segment durations must be > 0");
  auto segment = [&](SignalKind kind, double duration, std::uint64_t seed) {
    SignalSpec s;
    s.kind = kind;
    s.duration = duration;
    s.dt = dt;
    s.amplitude = spec.amplitude;
    s.hold = spec.hold;
    s.chirp_f0 = spec.chirp_f0;
    s.chirp_f1 = spec.chirp_f1;
    s.seed = seed;
    return generate(s);
  };
  std::vector<double> out = segment(SignalKind::Step, spec.step_duration, spec.seed);
  for (const auto& [kind, duration, seed] :
       {std::tuple{SignalKind::Ramp, spec.ramp_duration, spec.seed + 1},
        std::tuple{SignalKind::Chirp, spec.chirp_duration, spec.seed + 2}}) {
    const auto part = segment(kind, duration, seed);
    out.insert(out.end(), part.begin() + 1, part.end());
  }
  return out;
}

Eigen::MatrixXd experiment_commands(const ExperimentSpec& spec) {
  require(spec.dt > 0.0, "dt", "must be > 0");
  std::array<std::vector<double>, 4> columns;
  std::size_t length = 0;
  for (int c = 0; c < kNumChannels; ++c) {
    const auto& in = spec.inputs[c];
    if (const auto* s = std::get_if<SignalSpec>(&in)) {
      require(s->dt == spec.dt, "dt", "signal dt must match the experiment dt");
      columns[c] = generate(*s);
    } else if (const auto* l = std::get_if<LayoutSpec>(&in)) {
      columns[c] = generate_layout(*l, spec.dt);
    } else {
      continue;
    }
    if (length == 0) length = columns[c].size();
    require(columns[c].size() == length, "inputs", "excited channels differ in sample count");
  }
  require(length > 0, "inputs", "at least one channel must be excited");

  Eigen::MatrixXd u(static_cast<Eigen::Index>(length), kNumChannels);
  for (Channel ch : kAllChannels) {
    const int c = index(ch);
    if (columns[c].empty()) {
      u.col(c).setConstant(nominal_command(ch));
    } else {
      u.col(c) = Eigen::Map<const Eigen::VectorXd>(columns[c].data(), u.rows());
    }
  }
  return u;
}

IoRecord run_commands(const PlantProfile& profile, const Eigen::MatrixXd& commands, double dt) {
  require(commands.cols() == kNumChannels, "commands", "need four columns");
  require(commands.rows() >= 1, "commands", "empty");
  SurrogatePlant plant(profile, dt);
  Eigen::MatrixXd y(commands.rows(), kNumChannels);
  for (Eigen::Index k = 0; k < commands.rows(); ++k) {
    const Eigen::Vector4d u = commands.row(k).transpose();
    const PlantOutput out = plant.step(u);
    if (!out.measured.allFinite()) {
      throw EpisodeError("plant diverged at sample " + std::to_string(k));
    }
    y.row(k) = out.measured.transpose();
  }
  return IoRecord::four_channel(dt, commands, std::move(y));
}

IoRecord run_profile_experiment(const PlantProfile& profile, const ExperimentSpec& spec) {
  return run_commands(profile, experiment_commands(spec), spec.dt);
}

ExperimentSpec layout_experiment(Channel channel, double dt, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.dt = dt;
  LayoutSpec layout;
  layout.amplitude = default_excitation_range(channel);
  layout.seed = seed;
  spec.inputs[index(channel)] = layout;
  return spec;
}

}  // namespace clsid
