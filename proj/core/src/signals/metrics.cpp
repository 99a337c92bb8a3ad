#include "clsid/signals/metrics.hpp"

#include <cmath>
#include <numeric>

#include "clsid/error.hpp"

namespace clsid {

double fit_percentage(std::span<const double> actual, std::span<const double> predicted) {
  require(actual.size() == predicted.size(), "predicted", "length must equal actual length");
  require(actual.size() >= 2, "actual", "needs at least two samples");
  const double mean =
      std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double err = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    const double d = actual[i] - mean;
    err += e * e;
    spread += d * d;
  }
  if (!(spread > 0.0)) {
    throw ExcitationError("fit_percentage: actual signal is constant (zero denominator)");
  }
  return (1.0 - std::sqrt(err) / std::sqrt(spread)) * 100.0;
}

}  // namespace clsid
