#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace clsid {

enum class SignalKind { Step, Ramp, Chirp };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Excitation signal description. Values are in channel units, times in s.
///
/// Step and ramp levels are drawn uniformly from @c amplitude and held for a
/// dwell drawn uniformly from @c hold. A chirp oscillates around the midpoint
/// of @c amplitude with half its width. @c offset is added to every sample.
struct SignalSpec {
  SignalKind kind = SignalKind::Step;
  double duration = 100.0;
  double dt = 0.0005;
  Interval amplitude{0.0, 1.0};
  Interval hold{5.0, 20.0};
  double chirp_f0 = 0.0;
  double chirp_f1 = 1.0;
  double offset = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  /// floor(duration/dt) + 1; both endpoints are sampled.
  std::size_t sample_count() const;
};

/// Deterministic single-channel sample sequence for @p spec.
std::vector<double> generate(const SignalSpec& spec);

/// Instantaneous frequency (Hz) of the linear chirp at time @p t.
double chirp_frequency(double f0, double f1, double duration, double t);

/// Time at which the linear chirp reaches @p f.
double chirp_time_at(double f0, double f1, double duration, double f);

const char* to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& name);

}  // namespace clsid
