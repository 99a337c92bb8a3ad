#include "clsid/plant/profile.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "clsid/error.hpp"

namespace clsid {

std::array<TransferFunction, 4> nominal_core() {
  return {TransferFunction({0.4694, 6.089, 8.697}, {1.0, 6.432, 11.03, 8.274}),
          TransferFunction({13.59, 24.56}, {1.0, 11.48, 32.5, 40.13}),
          TransferFunction({145.9, 37.55}, {1.0, 46.43, 161.0, 38.38}),
          TransferFunction({0.3078, 5.267, 5.553}, {1.0, 4.595, 7.528, 6.045})};
}

void PlantProfile::validate() const {
  require(!name.empty(), "name", "must not be empty");
  require(osc_amplitude >= 0.0, "osc_amplitude", "must be >= 0");
  require(osc_freq > 0.0, "osc_freq", "must be > 0");
  for (double s : noise_std) require(s >= 0.0, "noise_std", "entries must be >= 0");
  require(hf_distortion_gain >= 0.0 && hf_distortion_gain <= 1.0, "hf_distortion_gain",
          "must be in [0, 1]");
  require(coupling_gain >= 0.0, "coupling_gain", "must be >= 0");
  for (double w : coupling_sources) require(w >= 0.0, "coupling_sources", "entries must be >= 0");
  require(cutoff > 0.0, "cutoff", "must be > 0");
  require(cubic_gain >= 0.0, "cubic_gain", "must be >= 0");
}

TransferFunction reflect_slowest_zero(const TransferFunction& tf) {
  const auto zeros = roots(tf.num());
  if (zeros.empty()) throw StructuralError("reflect_slowest_zero: model has no zeros");
  const auto slowest = std::min_element(zeros.begin(), zeros.end(), [](auto a, auto b) {
    return std::abs(a) < std::abs(b);
  });
  const double z = slowest->real();
  if (slowest->imag() != 0.0 || z == 0.0) {
    throw StructuralError("reflect_slowest_zero: slowest zero must be real and nonzero");
  }
  // (s - z) -> -(s + z): same value at s = 0 and the same magnitude on the
  // imaginary axis.
  Polynomial rest{tf.num()[0]};
  for (auto it = zeros.begin(); it != zeros.end(); ++it) {
    if (it != slowest) rest = polymul(rest, poly_from_roots({*it}));
  }
  const Polynomial num = polymul(rest, {-1.0, -z});
  return TransferFunction(num, tf.den());
}

PlantProfile make_profile(const std::string& name) {
  PlantProfile p;
  p.name = name;
  p.core = nominal_core();
  p.noise_std = {0.03, 0.01, 0.002, 0.02};
  if (name == "cnn") return p;
  if (name == "mlp") {
    p.core[0] = reflect_slowest_zero(p.core[0]);
    p.core[1] = reflect_slowest_zero(p.core[1]);
    return p;
  }
  if (name == "untrained") {
    p.hf_distortion_gain = 2.0 * p.hf_distortion_gain;
    p.cubic_gain = 1.0;
    p.cutoff = 0.45;
    return p;
  }
  if (name == "linear_only") {
    p.osc_amplitude = 0.0;
    p.noise_std = {0.0, 0.0, 0.0, 0.0};
    p.hf_distortion_gain = 0.0;
    p.coupling_gain = 0.0;
    p.cubic_gain = 0.0;
    return p;
  }
  throw ValidationError("profile: unknown name '" + name +
                        "' (expected cnn, mlp, untrained or linear_only)");
}

}  // namespace clsid
