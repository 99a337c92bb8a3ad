#include "clsid/sysid/decoupling.hpp"

#include <cmath>

#include "clsid/error.hpp"
#include "clsid/lti/simulate.hpp"
#include "clsid/signals/channel_defaults.hpp"
#include "clsid/signals/metrics.hpp"

namespace clsid {

namespace {

std::vector<double> chirp(const DecouplingConfig& cfg, Channel c) {
  SignalSpec s;
  s.kind = SignalKind::Chirp;
  s.duration = cfg.chirp_duration;
  s.dt = cfg.dt;
  s.amplitude = cfg.ranges[index(c)];
  s.chirp_f0 = cfg.chirp_f0;
  s.chirp_f1 = cfg.chirp_f1;
  return generate(s);
}

Eigen::MatrixXd nominal_commands(Eigen::Index rows) {
  Eigen::MatrixXd u(rows, kNumChannels);
  for (Channel c : kAllChannels) u.col(index(c)).setConstant(nominal_command(c));
  return u;
}

void set_column(Eigen::MatrixXd& u, Channel c, const std::vector<double>& values) {
  u.col(index(c)) = Eigen::Map<const Eigen::VectorXd>(values.data(), u.rows());
}

IoRecord run_checked(const PlantRunner& plant, const Eigen::MatrixXd& u, double dt) {
  IoRecord rec = plant(u, dt);
  if (rec.samples() != u.rows() || rec.y.cols() != kNumChannels || !rec.y.allFinite()) {
    throw EpisodeError("decoupling_test: plant run failed or diverged");
  }
  return rec;
}

}  // namespace

DecouplingConfig::DecouplingConfig() {
  for (Channel c : kAllChannels) ranges[index(c)] = default_excitation_range(c);
}

void DecouplingConfig::validate() const {
  require(dt > 0.0, "dt", "must be > 0");
  require(chirp_duration > 0.0, "chirp_duration", "must be > 0");
  require(chirp_f0 >= 0.0 && chirp_f0 < chirp_f1, "chirp_f1", "need 0 <= f0 < f1");
  require(drop_threshold >= 0.0, "drop_threshold", "must be >= 0");
  require(cutoff > 0.0, "cutoff", "must be > 0");
}

const char* to_string(Verdict v) { return v == Verdict::Independent ? "independent" : "coupled"; }

DecouplingReport decoupling_test(const PlantRunner& plant, Channel dim_m, Channel dim_n,
                                 const DecouplingConfig& cfg) {
  cfg.validate();
  require(dim_m != dim_n, "dim_n", "must differ from dim_m");
  const int m = index(dim_m);

  const auto chirp_m = chirp(cfg, dim_m);
  const auto rows = static_cast<Eigen::Index>(chirp_m.size());

  Eigen::MatrixXd u_fit = nominal_commands(rows);
  set_column(u_fit, dim_m, chirp_m);
  const IoRecord fit_rec = run_checked(plant, u_fit, cfg.dt);

  Eigen::MatrixXd u_test = u_fit;
  set_column(u_test, dim_n, chirp(cfg, dim_n));
  const IoRecord test_rec = run_checked(plant, u_test, cfg.dt);

  FitConfig fit_cfg = cfg.fit.value_or(default_structure(dim_m));
  fit_cfg.kstep = 0;
  const FitResult fit = fit_tf(fit_rec, m, fit_cfg);

  DecouplingReport report;
  report.dim_m = dim_m;
  report.dim_n = dim_n;
  report.model = fit.model;

  const auto score = [&](const IoRecord& rec, std::size_t count) {
    const auto u = rec.input(m);
    const auto y = rec.output(m);
    const auto sim = simulate_tf(fit.model, u, cfg.dt);
    return fit_percentage({y.data(), count}, {sim.data(), count});
  };
  report.fit_stage_percent = score(fit_rec, chirp_m.size());
  report.test_stage_percent = score(test_rec, chirp_m.size());

  const double t_cut = chirp_time_at(cfg.chirp_f0, cfg.chirp_f1, cfg.chirp_duration, cfg.cutoff);
  const auto below = static_cast<std::size_t>(std::floor(t_cut / cfg.dt));
  if (cfg.cutoff > cfg.chirp_f0 && below >= 10 && below < chirp_m.size()) {
    report.below_cutoff_percent = score(test_rec, below);
  }
  report.verdict = report.test_stage_percent >= report.fit_stage_percent - cfg.drop_threshold
                       ? Verdict::Independent
                       : Verdict::Coupled;
  return report;
}

}  // namespace clsid
