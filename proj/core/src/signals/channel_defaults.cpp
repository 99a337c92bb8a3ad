#include "clsid/signals/channel_defaults.hpp"

#include <array>

namespace clsid {

double nominal_command(Channel c) { return c == Channel::Z ? 0.98 : 0.0; }

double channel_span(Channel c) {
  static constexpr std::array<double, 4> spans{1.5, 0.6, 0.35, 1.0};
  return spans[index(c)];
}

Interval default_excitation_range(Channel c) {
  switch (c) {
    case Channel::Vx: return {-0.25, 0.75};
    case Channel::Vy: return {-0.2, 0.2};
    case Channel::Z: return {0.8, 1.0};
    case Channel::Wyaw: return {-1.0 / 3.0, 1.0 / 3.0};
  }
  return {0.0, 0.0};
}

bool is_velocity_channel(Channel c) { return c != Channel::Z; }

}  // namespace clsid
