#pragma once

#include "clsid/signals/io_record.hpp"
#include "clsid/signals/signal.hpp"

namespace clsid {

/// Command held on a channel that is not being excited: zero for velocity
/// channels, 0.98 m nominal walking height.
double nominal_command(Channel c);

/// Width of the admissible command interval (m/s, m, rad/s).
double channel_span(Channel c);

/// Default excitation amplitude range. Chirp half-width is about span/pi,
/// which puts the surrogate's rate knee near 0.6 Hz.
Interval default_excitation_range(Channel c);

/// True for the velocity channels (vx, vy, wyaw).
bool is_velocity_channel(Channel c);

}  // namespace clsid
