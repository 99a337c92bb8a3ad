#pragma once

#include <span>

namespace clsid {

/// (1 - ||a - a_hat|| / ||a - mean(a)||) * 100. Can be negative; exactly 100
/// iff the sequences match. Throws ValidationError when lengths differ or are
/// below two and ExcitationError when @p actual is constant.
double fit_percentage(std::span<const double> actual, std::span<const double> predicted);

}  // namespace clsid
