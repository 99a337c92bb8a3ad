#include "clsid/sysid/linearity.hpp"

#include <cmath>

#include "clsid/error.hpp"
#include "clsid/lti/simulate.hpp"
#include "clsid/signals/metrics.hpp"
#include "clsid/signals/signal.hpp"

namespace clsid {

LinearityReport linearity_report(const IoRecord& data, int channel, const TransferFunction& model,
                                 double cutoff, const ChirpWindow& window) {
  data.validate();
  require(channel >= 0 && channel < data.u.cols() && channel < data.y.cols(), "channel",
          "out of range");
  require(window.duration > 0.0 && window.f0 < window.f1, "window", "invalid chirp window");
  if (!(cutoff > window.f0 && cutoff < window.f1)) {
    throw RangeError("cutoff: must lie strictly inside the chirp band");
  }

  const auto first = static_cast<Eigen::Index>(std::llround(window.start / data.dt));
  const auto last =
      static_cast<Eigen::Index>(std::llround((window.start + window.duration) / data.dt));
  require(first >= 0 && last < data.samples() && first < last, "window",
          "chirp window lies outside the record");
  const double t_cut = window.start + chirp_time_at(window.f0, window.f1, window.duration, cutoff);
  const auto split = static_cast<Eigen::Index>(std::ceil(t_cut / data.dt - 1e-9));

  const auto u = data.input(channel);
  const auto y = data.output(channel);
  const auto sim = simulate_tf(model, u, data.dt);

  auto score = [&](Eigen::Index lo, Eigen::Index hi) {
    const auto count = static_cast<std::size_t>(hi - lo);
    return fit_percentage({y.data() + lo, count}, {sim.data() + lo, count});
  };
  LinearityReport out;
  out.split_time = t_cut;
  out.fit_below = score(first, split);
  out.fit_above = score(split, last + 1);
  return out;
}

}  // namespace clsid
