#pragma once

#include <complex>
#include <vector>

#include "clsid/lti/state_space.hpp"
#include "clsid/lti/transfer_function.hpp"

namespace clsid {

struct PoleZeroReport {
  std::vector<std::complex<double>> poles;
  std::vector<std::complex<double>> zeros;
  bool asymptotically_stable = false;
  bool minimum_phase = false;
};

/// Poles and zeros of a continuous transfer function with stability and
/// minimum-phase flags.
PoleZeroReport poles_zeros(const TransferFunction& tf);

/// Eigenvalue-based stability of a realization; uses the unit circle when the
/// model is discrete.
bool is_asymptotically_stable(const StateSpaceModel& ss);

/// Solves A X + X A^T + Q = 0 by the Kronecker-product linear system.
Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& A,
                                          const Eigen::MatrixXd& Q);

/// Hankel singular values in descending order. Throws StabilityError when the
/// continuous model is not asymptotically stable.
std::vector<double> hankel_singular_values(const StateSpaceModel& ss);

/// H(j 2 pi f) for every frequency in Hz.
std::vector<std::complex<double>> frequency_response(const TransferFunction& tf,
                                                     const std::vector<double>& freqs_hz);

}  // namespace clsid
