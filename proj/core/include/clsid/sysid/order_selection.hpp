#pragma once

#include <span>
#include <string>
#include <vector>


#include "clsid/sysid/fit.hpp"

namespace clsid {

struct OrderCandidate {
  int n_poles = 0;
  int n_zeros = 0;
  /// -inf when every start diverged.
  double fit_percent = 0.0;
  bool converged = false;
  bool stable = false;
  TransferFunction model{{1.0}, {1.0, 1.0}};
};

struct OrderSelection {
  int n_poles = 0;
  int n_zeros = 0;
  FitResult selected;
  /// Every structure tried, ordered by (n_poles, n_zeros).
  std::vector<OrderCandidate> table;
  /// Hankel singular values of the best-fitting stable candidate (empty if none).
  std::vector<double> hsv;
  std::vector<std::string> warnings;
};

/// Fits every structure with n_zeros < n_poles <= max_poles and returns the
/// one with the fewest parameters whose fit is within 2 points of the best.
/// Each structure is also warm-started from its nested smaller neighbours so
/// that the best fit never decreases as poles are added. @p base supplies
/// the non-structural fit settings.
OrderSelection select_order(std::span<const double> u, std::span<const double> y, double dt,
                            int max_poles, const FitConfig& base = {});

}  // namespace clsid
