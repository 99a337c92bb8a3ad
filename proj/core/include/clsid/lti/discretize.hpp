#pragma once

#include "clsid/lti/state_space.hpp"

namespace clsid {

/// Zero-order-hold equivalent of a continuous model with period @p dt.
///
/// Uses the matrix exponential of the augmented block [[A, B], [0, 0]] * dt,
/// so A_d = e^{A dt} and B_d = int_0^dt e^{A s} ds B. C and D are unchanged.
StateSpaceModel c2d_zoh(const StateSpaceModel& ss, double dt);

}  // namespace clsid
