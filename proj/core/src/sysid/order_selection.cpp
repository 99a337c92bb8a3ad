#include "clsid/sysid/order_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "clsid/error.hpp"
#include "clsid/lti/analysis.hpp"
#include "clsid/lti/state_space.hpp"

namespace clsid {

namespace {

// Exact pole/zero pair at s = -1: same response, one more pole and zero.
TransferFunction with_cancelled_pair(const TransferFunction& tf) {
  return TransferFunction(polymul(tf.num(), {1.0, 1.0}), polymul(tf.den(), {1.0, 1.0}));
}

// Extra real pole far above the fitting bandwidth with unit DC gain.
TransferFunction with_far_pole(const TransferFunction& tf, double rate) {
  return TransferFunction(polymul(tf.num(), {rate}), polymul(tf.den(), {1.0, rate}));
}

}  // namespace

OrderSelection select_order(std::span<const double> u, std::span<const double> y, double dt,
                            int max_poles, const FitConfig& base) {
  require(max_poles >= 1 && max_poles <= 6, "max_poles", "must be in [1, 6]");
  const double far_rate = 0.5 / (dt * base.decimation);

  OrderSelection out;
  std::map<std::pair<int, int>, FitResult> fits;
  for (int np = 1; np <= max_poles; ++np) {
    for (int nz = 0; nz < np; ++nz) {
      FitConfig cfg = base;
      cfg.n_poles = np;
      cfg.n_zeros = nz;
      std::vector<TransferFunction> warm;
      if (auto it = fits.find({np, nz - 1}); it != fits.end()) warm.push_back(it->second.model);
      if (auto it = fits.find({np - 1, nz - 1}); it != fits.end()) {
        warm.push_back(with_cancelled_pair(it->second.model));
      }
      if (auto it = fits.find({np - 1, nz}); it != fits.end()) {
        warm.push_back(with_far_pole(it->second.model, far_rate));
      }

      OrderCandidate cand;
      cand.n_poles = np;
      cand.n_zeros = nz;
      try {
        FitResult r = fit_tf(u, y, dt, cfg, warm);
        cand.fit_percent = r.fit_percent;
        cand.converged = r.converged;
        cand.stable = poles_zeros(r.model).asymptotically_stable;
        cand.model = r.model;
        fits.emplace(std::pair{np, nz}, std::move(r));
      } catch (const ConvergenceError&) {
        cand.fit_percent = -std::numeric_limits<double>::infinity();
      }
      out.table.push_back(std::move(cand));
    }
  }
  if (fits.empty()) throw ConvergenceError("select_order: every structure diverged");

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : out.table) best = std::max(best, c.fit_percent);

  const OrderCandidate* chosen = nullptr;
  for (const auto& c : out.table) {
    if (c.fit_percent < best - 2.0) continue;
    if (chosen == nullptr) {
      chosen = &c;
      continue;
    }
    const int size = c.n_poles + c.n_zeros;
    const int chosen_size = chosen->n_poles + chosen->n_zeros;
    if (size < chosen_size || (size == chosen_size && c.fit_percent > chosen->fit_percent)) {
      chosen = &c;
    }
  }
  out.n_poles = chosen->n_poles;
  out.n_zeros = chosen->n_zeros;
  out.selected = fits.at({out.n_poles, out.n_zeros});
  out.warnings = out.selected.warnings;

  const OrderCandidate* best_stable = nullptr;
  for (const auto& c : out.table) {
    if (c.stable && (best_stable == nullptr || c.fit_percent > best_stable->fit_percent)) {
      best_stable = &c;
    }
  }
  if (best_stable != nullptr) {
    out.hsv = hankel_singular_values(tf_to_ss_ccf(best_stable->model));
  } else {
    out.warnings.push_back("no stable candidate; Hankel singular values unavailable");
  }
  return out;
}

}  // namespace clsid
