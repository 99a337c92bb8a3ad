#include "clsid/signals/signal.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "clsid/error.hpp"

namespace clsid {

namespace {

// Portable uniform draw in [0, 1); std distributions are not bit-stable
// across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw(std::mt19937_64& rng, const Interval& range) {
  return range.lo + (range.hi - range.lo) * unit_uniform(rng);
}

// Breakpoints (time, level) covering [0, duration].
std::vector<std::pair<double, double>> knots(const SignalSpec& spec, std::mt19937_64& rng) {
  std::vector<std::pair<double, double>> out;
  double t = 0.0;
  out.emplace_back(t, draw(rng, spec.amplitude));
  while (t < spec.duration) {
    const double dwell = std::max(draw(rng, spec.hold), spec.dt);
    t += dwell;
    out.emplace_back(t, draw(rng, spec.amplitude));
  }
  return out;
}

}  // namespace

void SignalSpec::validate() const {
  require(std::isfinite(duration) && duration > 0.0, "duration", "must be > 0");
  require(std::isfinite(dt) && dt > 0.0, "dt", "must be > 0");
  require(amplitude.lo <= amplitude.hi, "amplitude_range", "min must be <= max");
  require(hold.lo <= hold.hi && hold.lo > 0.0, "hold_range", "need 0 < min <= max");
  require(chirp_f0 >= 0.0 && chirp_f0 <= chirp_f1, "chirp_f0", "need 0 <= f0 <= f1");
  require(chirp_f1 < 0.5 / dt, "chirp_f1", "must be below Nyquist 1/(2 dt)");
}

std::size_t SignalSpec::sample_count() const {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

double chirp_frequency(double f0, double f1, double duration, double t) {
  return f0 + (f1 - f0) * t / duration;
}

double chirp_time_at(double f0, double f1, double duration, double f) {
  if (f1 == f0) return f <= f0 ? 0.0 : duration;
  return duration * (f - f0) / (f1 - f0);
}

std::vector<double> generate(const SignalSpec& spec) {
  spec.validate();
  const std::size_t n = spec.sample_count();
  std::vector<double> x(n);
  std::mt19937_64 rng(spec.seed);

  switch (spec.kind) {
    case SignalKind::Chirp: {
      const double amp = spec.amplitude.half_width();
      const double mid = spec.amplitude.mid();
      const double sweep = (spec.chirp_f1 - spec.chirp_f0) / (2.0 * spec.duration);
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * spec.dt;
        const double phase = 2.0 * std::numbers::pi * (spec.chirp_f0 * t + sweep * t * t);
        x[k] = spec.offset + mid + amp * std::sin(phase);
      }
      break;
    }
    case SignalKind::Step:
    case SignalKind::Ramp: {
      const auto pts = knots(spec, rng);
      std::size_t seg = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * spec.dt;
        while (seg + 1 < pts.size() && pts[seg + 1].first <= t) ++seg;
        double v = pts[seg].second;
        if (spec.kind == SignalKind::Ramp && seg + 1 < pts.size()) {
          const auto& [t0, v0] = pts[seg];
          const auto& [t1, v1] = pts[seg + 1];
          v = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
        x[k] = spec.offset + v;
      }
      break;
    }
  }
  return x;
}

const char* to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::Step: return "step";
    case SignalKind::Ramp: return "ramp";
    case SignalKind::Chirp: return "chirp";
  }
  return "?";
}

SignalKind signal_kind_from_string(const std::string& name) {
  if (name == "step") return SignalKind::Step;
  if (name == "ramp") return SignalKind::Ramp;
  if (name == "chirp") return SignalKind::Chirp;
  throw ValidationError("kind: unknown signal kind '" + name + "' (step|ramp|chirp)");
}

}  // namespace clsid
