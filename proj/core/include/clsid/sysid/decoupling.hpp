#pragma once

#include <array>
#include <functional>
#include <optional>

#include <Eigen/Core>

#include "clsid/signals/io_record.hpp"
#include "clsid/signals/signal.hpp"
#include "clsid/sysid/fit.hpp"

namespace clsid {

/// Produces a record for a command matrix (N x 4) sampled at dt.
using PlantRunner = std::function<IoRecord(const Eigen::MatrixXd& commands, double dt)>;

struct DecouplingConfig {
  double dt = 0.0005;
  double chirp_duration = 100.0;
  double chirp_f0 = 0.0;
  double chirp_f1 = 1.0;
  double cutoff = 0.6;
  double drop_threshold = 15.0;
  /// Chirp range per channel; defaults to the channel excitation ranges.
  std::array<Interval, 4> ranges;
  /// Structure defaults to the channel's identified structure when unset.
  std::optional<FitConfig> fit;

  DecouplingConfig();
  void validate() const;
};

enum class Verdict { Independent, Coupled };
const char* to_string(Verdict v);

struct DecouplingReport {
  Channel dim_m = Channel::Vx;
  Channel dim_n = Channel::Vy;
  double fit_stage_percent = 0.0;
  double test_stage_percent = 0.0;
  /// Test-stage fit over samples whose chirp frequency is below the cutoff.
  std::optional<double> below_cutoff_percent;
  Verdict verdict = Verdict::Independent;
  TransferFunction model{{1.0}, {1.0, 1.0}};

  double drop() const { return fit_stage_percent - test_stage_percent; }
};

/// Four-step protocol: fit M's model with a chirp on M and every other
/// channel held nominal, then score that model when N is chirped as well.
/// M is independent of N when the test fit stays within drop_threshold of
/// the fit-stage value. Both stages score the model's full-rate simulation.
DecouplingReport decoupling_test(const PlantRunner& plant, Channel dim_m, Channel dim_n,
                                 const DecouplingConfig& cfg = {});

}  // namespace clsid
