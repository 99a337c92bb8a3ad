#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "clsid/lti/state_space.hpp"
#include "clsid/lti/transfer_function.hpp"

namespace clsid::testing {

/// Small seeded generator for property tests. Every draw is reproducible from
/// the seed, so a failing case can be replayed by its index.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal();
    return m;
  }

  Eigen::VectorXd vector(Eigen::Index n) { return matrix(n, 1); }

  /// Well-conditioned invertible matrix (identity plus a bounded perturbation).
  Eigen::MatrixXd invertible(Eigen::Index n) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + 0.3 * matrix(n, n) / std::sqrt(double(n));
    return m;
  }

  Eigen::MatrixXd psd(Eigen::Index n, double scale = 1.0) {
    const Eigen::MatrixXd m = matrix(n, n);
    return scale * m * m.transpose() / double(n);
  }

  /// Left-half-plane roots in conjugate pairs, magnitudes in [0.3, 8].
  std::vector<std::complex<double>> stable_roots(int count) {
    std::vector<std::complex<double>> r;
    while (static_cast<int>(r.size()) < count) {
      if (count - static_cast<int>(r.size()) >= 2 && uniform(0.0, 1.0) < 0.5) {
        const double re = -uniform(0.3, 4.0);
        const double im = uniform(0.2, 4.0);
        r.emplace_back(re, im);
        r.emplace_back(re, -im);
      } else {
        r.emplace_back(-uniform(0.3, 8.0), 0.0);
      }
    }
    return r;
  }

  /// Strictly proper, stable, minimum-phase transfer function.
  TransferFunction stable_tf(int poles, int zeros) {
    Polynomial num = poly_from_roots(stable_roots(zeros));
    const double gain = uniform(0.5, 3.0) * (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    for (double& c : num) c *= gain;
    return TransferFunction(num, poly_from_roots(stable_roots(poles)));
  }

  /// Continuous model with eigenvalues strictly in the left half plane.
  StateSpaceModel stable_ss(int n, int m, int p) {
    const Eigen::MatrixXd T = invertible(n);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    const auto poles = stable_roots(n);
    for (int i = 0; i < n; ++i) {
      if (poles[i].imag() > 0.0 && i + 1 < n) {
        D(i, i) = D(i + 1, i + 1) = poles[i].real();
        D(i, i + 1) = poles[i].imag();
        D(i + 1, i) = -poles[i].imag();
        ++i;
      } else {
        D(i, i) = poles[i].real();
      }
    }
    return StateSpaceModel(T * D * T.inverse(), matrix(n, m), matrix(p, n),
                           Eigen::MatrixXd::Zero(p, m));
  }

 private:
  std::mt19937_64 rng_;
};

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::MatrixXd column(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Amplitude of the @p freq component of @p x by projection on sin/cos over
/// the whole record (exact for an integer number of periods).
inline double tone_amplitude(const std::vector<double>& x, double dt, double freq) {
  double s = 0.0, c = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double ph = 2.0 * M_PI * freq * dt * double(k);
    s += x[k] * std::sin(ph);
    c += x[k] * std::cos(ph);
  }
  return 2.0 * std::hypot(s, c) / double(x.size());
}

}  // namespace clsid::testing
