#pragma once

#include "clsid/lti/transfer_function.hpp"
#include "clsid/signals/io_record.hpp"

namespace clsid {

/// Location of a linear chirp inside a record (times in seconds from the
/// record start).
struct ChirpWindow {
  double start = 0.0;
  double duration = 100.0;
  double f0 = 0.0;
  double f1 = 1.0;
};

struct LinearityReport {
  double fit_below = 0.0;
  double fit_above = 0.0;
  /// Record time at which the chirp crosses the cutoff.
  double split_time = 0.0;

  double gap() const { return fit_below - fit_above; }
};

/// Simulates @p model over the whole input column @p channel of @p data and
/// scores it separately on the chirp samples below and above @p cutoff Hz.
/// RangeError unless f0 < cutoff < f1.
LinearityReport linearity_report(const IoRecord& data, int channel, const TransferFunction& model,
                                 double cutoff, const ChirpWindow& window);

}  // namespace clsid
