#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "clsid/error.hpp"
#include "clsid/io/atomic_file.hpp"
#include "clsid/io/json_io.hpp"
#include "clsid/lti/analysis.hpp"
#include "clsid/lti/state_space.hpp"
#include "clsid/nav/episode.hpp"
#include "clsid/nav/global_planner.hpp"
#include "clsid/nav/report.hpp"
#include "clsid/planning/sqp_solver.hpp"
#include "clsid/plant/experiment.hpp"
#include "clsid/signals/channel_defaults.hpp"
#include "clsid/signals/filter.hpp"
#include "clsid/sysid/decoupling.hpp"
#include "clsid/sysid/fit.hpp"
#include "clsid/sysid/linearity.hpp"
#include "clsid/sysid/order_selection.hpp"
#include "clsid/sysid/prediction.hpp"

namespace clsid::cli {

namespace fs = std::filesystem;

namespace {

// Values from a JSON config file fill every option not given on the
// command line.
class Config {
 public:
  void load(const std::string& path) {
    if (!path.empty()) j_ = read_json_file(path);
    if (!j_.is_object()) throw ValidationError("config: top level must be a JSON object");
  }

  template <typename T>
  void merge(const CLI::Option* flag, const char* key, T& value) const {
    if (flag->count() > 0 || !j_.contains(key)) return;
    try {
      value = j_[key].get<T>();
    } catch (const Json::exception& e) {
      throw ValidationError(fmt::format("config key '{}': {}", key, e.what()));
    }
  }

  const Json* find(const char* key) const {
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

 private:
  Json j_ = Json::object();
};

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  Config cfg;

  void add(CLI::App* sub) {
    sub->add_option("--config", config, "JSON config; its keys match the long option names")
        ->check(CLI::ExistingFile);
    out_opt = sub->add_option("--out", out, "Output directory, created if absent (config key: out)")
                  ->capture_default_str();
    seed_opt = sub->add_option("--seed", seed, "Random seed (config key: seed)")->capture_default_str();
  }

  void load() {
    cfg.load(config);
    cfg.merge(out_opt, "out", out);
    cfg.merge(seed_opt, "seed", seed);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(fmt::format("cannot create output directory '{}': {}", out, ec.message()));
  }

  fs::path path(const std::string& name) const { return fs::path(out) / name; }
};

Channel parse_channel(const std::string& name) {
  try {
    return channel_from_string(name);
  } catch (const ValidationError&) {
    throw ValidationError(fmt::format("channel: unknown channel '{}' (vx, vy, z, wyaw)", name));
  }
}

PlantProfile load_profile(const Config& cfg, const std::string& name, const CLI::Option* flag) {
  const Json* j = cfg.find("profile");
  if (flag->count() == 0 && j != nullptr && j->is_object()) return parse_profile(*j);
  std::string chosen = name;
  if (flag->count() == 0 && j != nullptr && j->is_string()) chosen = j->get<std::string>();
  return make_profile(chosen);
}

Scenario load_scenario(const Config& cfg, const std::string& path) {
  if (!path.empty()) return parse_scenario(read_json_file(path));
  if (const Json* j = cfg.find("scenario")) {
    return j->is_string() ? parse_scenario(read_json_file(j->get<std::string>())) : parse_scenario(*j);
  }
  return arch_scenario();
}

NmpcParams load_nmpc(const Config& cfg) {
  const Json* j = cfg.find("nmpc");
  return j != nullptr ? parse_nmpc_params(*j) : NmpcParams{};
}

std::array<TransferFunction, 4> load_models(const std::string& dir) {
  std::array<TransferFunction, 4> models = nominal_core();
  if (dir.empty()) return models;
  for (Channel c : kAllChannels) {
    const fs::path file = fs::path(dir) / fmt::format("fit_{}.json", channel_name(c));
    models[index(c)] = parse_transfer_function(read_json_file(file));
  }
  return models;
}

IoRecord load_record(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_csv(in);
}

int column_for(const IoRecord& rec, Channel c) {
  const std::string label = fmt::format("u_{}", channel_name(c));
  const auto it = std::find(rec.input_labels.begin(), rec.input_labels.end(), label);
  if (it == rec.input_labels.end()) {
    throw ValidationError(fmt::format("data: no column '{}' in the record", label));
  }
  return static_cast<int>(it - rec.input_labels.begin());
}

// ---------------------------------------------------------------- excite

void add_excite(CLI::App& app) {
  struct Opts {
    Common common;
    std::string profile = "cnn";
    std::string channel = "vx";
    std::string kind = "layout";
    double dt = 0.0005;
    double duration = 100.0;
    std::vector<double> amplitude;
    std::vector<double> hold{5.0, 20.0};
    double f0 = 0.0;
    double f1 = 1.0;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("excite", "Drive the surrogate plant with an excitation signal");
  o->common.add(sub);
  auto* profile = sub->add_option("--profile", o->profile,
                                  "Plant profile: cnn, mlp, untrained, linear_only (config key: profile, "
                                  "a name or an object of overrides)")
                      ->capture_default_str();
  auto* channel = sub->add_option("--channel", o->channel, "Excited channel: vx, vy, z, wyaw (config key: channel)")
                      ->capture_default_str();
  auto* kind = sub->add_option("--kind", o->kind,
                               "layout (200 s steps, 200 s ramps, 100 s chirp), step, ramp or chirp "
                               "(config key: kind)")
                   ->capture_default_str();
  auto* dt = sub->add_option("--dt", o->dt, "Sample period in s (config key: dt)")->capture_default_str();
  auto* duration = sub->add_option("--duration", o->duration,
                                   "Signal length in s for step/ramp/chirp (config key: duration)")
                       ->capture_default_str();
  auto* amplitude = sub->add_option("--amplitude", o->amplitude,
                                    "Level range lo hi in channel units (m/s, m, rad/s); defaults to the "
                                    "channel's excitation range (config key: amplitude)")
                        ->expected(2);
  auto* hold = sub->add_option("--hold", o->hold, "Dwell range lo hi in s (config key: hold)")
                   ->expected(2)
                   ->capture_default_str();
  auto* f0 = sub->add_option("--f0", o->f0, "Chirp start frequency in Hz (config key: f0)")->capture_default_str();
  auto* f1 = sub->add_option("--f1", o->f1, "Chirp end frequency in Hz (config key: f1)")->capture_default_str();
  sub->callback([o, profile, channel, kind, dt, duration, amplitude, hold, f0, f1] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(channel, "channel", o->channel);
    c.cfg.merge(kind, "kind", o->kind);
    c.cfg.merge(dt, "dt", o->dt);
    c.cfg.merge(duration, "duration", o->duration);
    c.cfg.merge(amplitude, "amplitude", o->amplitude);
    c.cfg.merge(hold, "hold", o->hold);
    c.cfg.merge(f0, "f0", o->f0);
    c.cfg.merge(f1, "f1", o->f1);
    PlantProfile plant = load_profile(c.cfg, o->profile, profile);
    plant.seed = c.seed;
    const Channel ch = parse_channel(o->channel);
    Interval range = default_excitation_range(ch);
    if (!o->amplitude.empty()) {
      if (o->amplitude.size() != 2) throw ValidationError("amplitude: expected lo hi");
      range = {o->amplitude[0], o->amplitude[1]};
    }
    if (o->hold.size() != 2) throw ValidationError("hold: expected lo hi");

    ExperimentSpec spec;
    spec.dt = o->dt;
    if (o->kind == "layout") {
      LayoutSpec layout;
      layout.amplitude = range;
      layout.hold = {o->hold[0], o->hold[1]};
      layout.chirp_f0 = o->f0;
      layout.chirp_f1 = o->f1;
      layout.seed = c.seed;
      spec.inputs[index(ch)] = layout;
    } else {
      SignalSpec s;
      s.kind = signal_kind_from_string(o->kind);
      s.duration = o->duration;
      s.dt = o->dt;
      s.amplitude = range;
      s.hold = {o->hold[0], o->hold[1]};
      s.chirp_f0 = o->f0;
      s.chirp_f1 = o->f1;
      s.seed = c.seed;
      s.validate();
      spec.inputs[index(ch)] = s;
    }
    const IoRecord rec = run_profile_experiment(plant, spec);
    const fs::path file = c.path(fmt::format("experiment_{}.csv", channel_name(ch)));
    write_file_atomic(file, to_csv(rec));
    fmt::print("excite: {} samples at {} s on {} ({} profile) -> {}\n", rec.samples(), rec.dt,
               channel_name(ch), plant.name, file.string());
  });
}

// ---------------------------------------------------------------- fit

void add_fit(CLI::App& app) {
  struct Opts {
    Common common;
    std::string data;
    std::string channel = "vx";
    int poles = 0;
    int zeros = -1;
    int decimation = 20;
    int multistart = 5;
    int max_iterations = FitConfig{}.max_iterations;
    int max_poles = 0;
    int kstep = 5;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("fit", "Fit a continuous transfer function to recorded data");
  o->common.add(sub);
  auto* data = sub->add_option("--data", o->data, "Input/output CSV (config key: data)")->check(CLI::ExistingFile);
  auto* channel = sub->add_option("--channel", o->channel, "Channel to fit (config key: channel)")
                      ->capture_default_str();
  auto* poles = sub->add_option("--poles", o->poles,
                                "Number of poles; 0 uses the channel's identified structure (config key: poles)")
                    ->capture_default_str();
  auto* zeros = sub->add_option("--zeros", o->zeros, "Number of zeros; -1 uses the channel default (config key: zeros)")
                    ->capture_default_str();
  auto* decimation = sub->add_option("--decimation", o->decimation,
                                     "Cost uses every n-th sample (config key: decimation)")
                         ->capture_default_str();
  auto* multistart = sub->add_option("--multistart", o->multistart, "Number of starts (config key: multistart)")
                         ->capture_default_str();
  auto* max_iter = sub->add_option("--max-iterations", o->max_iterations,
                                   "Iterations per start (config key: max_iterations)")
                       ->capture_default_str();
  auto* max_poles = sub->add_option("--max-poles", o->max_poles,
                                    "Search every structure up to this many poles; 0 fits one structure "
                                    "(config key: max_poles)")
                        ->capture_default_str();
  auto* kstep = sub->add_option("--kstep", o->kstep, "Horizon of the k-step predictive fit in samples (config key: kstep)")
                    ->capture_default_str();
  sub->callback([o, data, channel, poles, zeros, decimation, multistart, max_iter, max_poles, kstep] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(data, "data", o->data);
    c.cfg.merge(channel, "channel", o->channel);
    c.cfg.merge(poles, "poles", o->poles);
    c.cfg.merge(zeros, "zeros", o->zeros);
    c.cfg.merge(decimation, "decimation", o->decimation);
    c.cfg.merge(multistart, "multistart", o->multistart);
    c.cfg.merge(max_iter, "max_iterations", o->max_iterations);
    c.cfg.merge(max_poles, "max_poles", o->max_poles);
    c.cfg.merge(kstep, "kstep", o->kstep);
    if (o->data.empty()) throw ValidationError("data: a CSV record is required");
    const Channel ch = parse_channel(o->channel);
    const IoRecord rec = load_record(o->data);
    const int col = column_for(rec, ch);

    FitConfig fc = default_structure(ch);
    if (o->poles > 0) fc.n_poles = o->poles;
    if (o->zeros >= 0) fc.n_zeros = o->zeros;
    fc.decimation = o->decimation;
    fc.multistart = o->multistart;
    fc.max_iterations = o->max_iterations;
    fc.kstep = o->kstep;
    fc.seed = c.seed;
    fc.validate();

    Json out;
    FitResult result;
    if (o->max_poles > 0) {
      const OrderSelection sel = select_order(rec.input(col), rec.output(col), rec.dt, o->max_poles, fc);
      result = sel.selected;
      out = to_json(result);
      out["order_selection"] = to_json(sel);
    } else {
      result = fit_tf(rec, col, fc);
      out = to_json(result);
    }
    out["channel"] = channel_name(ch);
    const fs::path file = c.path(fmt::format("fit_{}.json", channel_name(ch)));
    write_json_file(file, out);
    fmt::print("fit {}: {} poles / {} zeros, fit {:.2f}%, {}-step fit {:.2f}% -> {}\n", channel_name(ch),
               result.model.order(), result.model.num_degree(), result.fit_percent, fc.kstep,
               result.kstep_fit_percent, file.string());
    for (const auto& w : result.warnings) fmt::print("  warning: {}\n", w);
  });
}

// ---------------------------------------------------------------- analyze

void add_analyze(CLI::App& app) {
  struct Opts {
    Common common;
    std::string model;
    std::string nominal;
    std::string data;
    std::string channel;
    int kstep = 5;
    double lowpass_fc = 0.0;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("analyze", "Poles, zeros, Hankel singular values and predictive fit of a model");
  o->common.add(sub);
  auto* model = sub->add_option("--model", o->model, "Model JSON with num/den, e.g. a fit output (config key: model)")
                    ->check(CLI::ExistingFile);
  auto* nominal = sub->add_option("--nominal", o->nominal,
                                  "Analyze the built-in model of this channel instead (config key: nominal)");
  auto* data = sub->add_option("--data", o->data, "Optional CSV for the k-step predictive fit (config key: data)")
                   ->check(CLI::ExistingFile);
  auto* channel = sub->add_option("--channel", o->channel, "Channel of --data; defaults to --nominal (config key: channel)");
  auto* kstep = sub->add_option("--kstep", o->kstep, "Prediction horizon in samples (config key: kstep)")->capture_default_str();
  auto* lowpass_fc = sub->add_option("--lowpass", o->lowpass_fc,
                                     "Also score against the output low-passed at this cutoff in Hz; 0 skips "
                                     "(config key: lowpass)")
                         ->capture_default_str();
  sub->callback([o, model, nominal, data, channel, kstep, lowpass_fc] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(model, "model", o->model);
    c.cfg.merge(nominal, "nominal", o->nominal);
    c.cfg.merge(data, "data", o->data);
    c.cfg.merge(channel, "channel", o->channel);
    c.cfg.merge(kstep, "kstep", o->kstep);
    c.cfg.merge(lowpass_fc, "lowpass", o->lowpass_fc);
    if (o->model.empty() == o->nominal.empty()) {
      throw ValidationError("model: give exactly one of --model and --nominal");
    }
    TransferFunction tf = o->model.empty() ? nominal_core()[index(parse_channel(o->nominal))]
                                           : parse_transfer_function(read_json_file(o->model));
    const std::string label = o->model.empty() ? o->nominal : fs::path(o->model).stem().string();

    const PoleZeroReport pz = poles_zeros(tf);
    Json out = to_json(tf);
    out["asymptotically_stable"] = pz.asymptotically_stable;
    out["minimum_phase"] = pz.minimum_phase;
    out["dc_gain"] = tf.dc_gain();
    if (pz.asymptotically_stable) out["hankel_singular_values"] = hankel_singular_values(tf_to_ss_ccf(tf));
    std::vector<double> freqs;
    for (int k = 0; k <= 40; ++k) freqs.push_back(0.01 * std::pow(10.0, k / 13.333333333333334));
    Json bode = Json::array();
    const auto h = frequency_response(tf, freqs);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      bode.push_back({{"f_hz", freqs[k]},
                      {"magnitude_db", 20.0 * std::log10(std::abs(h[k]))},
                      {"phase_deg", std::arg(h[k]) * 180.0 / std::acos(-1.0)}});
    }
    out["frequency_response"] = bode;

    if (!o->data.empty()) {
      const std::string chname = o->channel.empty() ? o->nominal : o->channel;
      if (chname.empty()) throw ValidationError("channel: required with --data");
      const IoRecord rec = load_record(o->data);
      const int col = column_for(rec, parse_channel(chname));
      const auto u = rec.input(col);
      const auto y = rec.output(col);
      const double raw = k_step_predict(tf, u, y, rec.dt, o->kstep).fit_percent(0);
      out["kstep"] = o->kstep;
      out["kstep_fit_percent"] = raw;
      fmt::print("analyze {}: {}-step fit {:.2f}%\n", label, o->kstep, raw);
      if (o->lowpass_fc > 0.0) {
        const auto yf = lowpass(y, rec.dt, o->lowpass_fc);
        const double filtered = k_step_predict(tf, u, yf, rec.dt, o->kstep).fit_percent(0);
        out["lowpass_hz"] = o->lowpass_fc;
        out["kstep_fit_percent_lowpass"] = filtered;
        fmt::print("analyze {}: {}-step fit after {} Hz low-pass {:.2f}%\n", label, o->kstep,
                   o->lowpass_fc, filtered);
      }
    }
    const fs::path file = c.path(fmt::format("analysis_{}.json", label));
    write_json_file(file, out);
    fmt::print("analyze {}: stable {}, minimum phase {}, dc gain {:.4f} -> {}\n", label,
               pz.asymptotically_stable, pz.minimum_phase, tf.dc_gain(), file.string());
  });
}

// ---------------------------------------------------------------- decouple

void add_decouple(CLI::App& app) {
  struct Opts {
    Common common;
    std::string profile = "cnn";
    std::string m;
    std::string n;
    bool all = false;
    double coupling = -1.0;
    double chirp_duration = 100.0;
    double dt = 0.0005;
    double drop_threshold = 15.0;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("decouple", "Decoupling test of channel M against channel N");
  o->common.add(sub);
  auto* profile = sub->add_option("--profile", o->profile, "Plant profile (config key: profile)")->capture_default_str();
  auto* m = sub->add_option("--m", o->m, "Channel whose model is fitted (config key: m)");
  auto* n = sub->add_option("--n", o->n, "Channel additionally excited in the test stage (config key: n)");
  auto* all = sub->add_flag("--all", o->all, "Run all 12 ordered pairs (config key: all)");
  auto* coupling = sub->add_option("--coupling", o->coupling,
                                   "Override the profile's cross-channel coupling gain, dimensionless "
                                   "(config key: coupling)");
  auto* duration = sub->add_option("--chirp-duration", o->chirp_duration, "Chirp length in s (config key: chirp_duration)")
                       ->capture_default_str();
  auto* dt = sub->add_option("--dt", o->dt, "Sample period in s (config key: dt)")->capture_default_str();
  auto* drop = sub->add_option("--drop-threshold", o->drop_threshold,
                               "Fit drop in percentage points that marks a coupled pair (config key: drop_threshold)")
                   ->capture_default_str();
  sub->callback([o, profile, m, n, all, coupling, duration, dt, drop] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(m, "m", o->m);
    c.cfg.merge(n, "n", o->n);
    c.cfg.merge(all, "all", o->all);
    c.cfg.merge(coupling, "coupling", o->coupling);
    c.cfg.merge(duration, "chirp_duration", o->chirp_duration);
    c.cfg.merge(dt, "dt", o->dt);
    c.cfg.merge(drop, "drop_threshold", o->drop_threshold);
    PlantProfile plant = load_profile(c.cfg, o->profile, profile);
    plant.seed = c.seed;
    if (o->coupling >= 0.0) plant.coupling_gain = o->coupling;
    plant.validate();

    DecouplingConfig dc;
    dc.dt = o->dt;
    dc.chirp_duration = o->chirp_duration;
    dc.drop_threshold = o->drop_threshold;
    dc.validate();
    const PlantRunner runner = [&plant](const Eigen::MatrixXd& u, double step) {
      return run_commands(plant, u, step);
    };

    std::vector<std::pair<Channel, Channel>> pairs;
    if (o->all) {
      for (Channel a : kAllChannels) {
        for (Channel b : kAllChannels) {
          if (a != b) pairs.emplace_back(a, b);
        }
      }
    } else {
      if (o->m.empty() || o->n.empty()) throw ValidationError("m: give --m and --n, or --all");
      pairs.emplace_back(parse_channel(o->m), parse_channel(o->n));
      if (pairs.front().first == pairs.front().second) throw ValidationError("n: must differ from m");
    }
    Json reports = Json::array();
    for (const auto& [a, b] : pairs) {
      const DecouplingReport r = decoupling_test(runner, a, b, dc);
      fmt::print("decouple {} <- {}: fit {:.2f}% test {:.2f}% drop {:.2f} -> {}\n", channel_name(a),
                 channel_name(b), r.fit_stage_percent, r.test_stage_percent, r.drop(), to_string(r.verdict));
      reports.push_back(to_json(r));
    }
    const fs::path file =
        o->all ? c.path("decoupling_matrix.json")
               : c.path(fmt::format("decoupling_{}_{}.json", channel_name(pairs[0].first), channel_name(pairs[0].second)));
    Json out{{"profile", plant.name}, {"coupling_gain", plant.coupling_gain}, {"drop_threshold", dc.drop_threshold}};
    if (o->all) {
      out["pairs"] = reports;
    } else {
      out.update(reports[0]);
    }
    write_json_file(file, out);
    fmt::print("decouple: -> {}\n", file.string());
  });
}

// ---------------------------------------------------------------- linearity

void add_linearity(CLI::App& app) {
  struct Opts {
    Common common;
    std::string profile = "cnn";
    std::vector<std::string> channels{"vx", "vy", "z", "wyaw"};
    double cutoff = 0.6;
    double dt = 0.0005;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand(
      "linearity", "Fit below versus above the linearity cutoff on the chirp segment of the layout experiment");
  o->common.add(sub);
  auto* profile = sub->add_option("--profile", o->profile, "Plant profile (config key: profile)")->capture_default_str();
  auto* channels = sub->add_option("--channel", o->channels, "Channels to test (config key: channel)")
                       ->capture_default_str();
  auto* cutoff = sub->add_option("--cutoff", o->cutoff, "Linearity cutoff in Hz (config key: cutoff)")->capture_default_str();
  auto* dt = sub->add_option("--dt", o->dt, "Sample period in s (config key: dt)")->capture_default_str();
  sub->callback([o, profile, channels, cutoff, dt] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(channels, "channel", o->channels);
    c.cfg.merge(cutoff, "cutoff", o->cutoff);
    c.cfg.merge(dt, "dt", o->dt);
    PlantProfile plant = load_profile(c.cfg, o->profile, profile);
    plant.seed = c.seed;
    Json out{{"profile", plant.name}, {"cutoff_hz", o->cutoff}};
    for (const std::string& name : o->channels) {
      const Channel ch = parse_channel(name);
      const ExperimentSpec spec = layout_experiment(ch, o->dt, c.seed);
      const LayoutSpec& layout = std::get<LayoutSpec>(spec.inputs[index(ch)]);
      const IoRecord rec = run_profile_experiment(plant, spec);
      FitConfig fc = default_structure(ch);
      fc.kstep = 0;
      fc.seed = c.seed;
      const FitResult fit = fit_tf(rec, index(ch), fc);
      const ChirpWindow window{layout.chirp_start(), layout.chirp_duration, layout.chirp_f0, layout.chirp_f1};
      const LinearityReport r = linearity_report(rec, index(ch), fit.model, o->cutoff, window);
      Json entry = to_json(r);
      entry["model"] = to_json(fit);
      out[channel_name(ch)] = entry;
      fmt::print("linearity {}: below {:.2f}% above {:.2f}% gap {:.2f}\n", channel_name(ch), r.fit_below,
                 r.fit_above, r.gap());
    }
    const fs::path file = c.path(fmt::format("linearity_{}.json", plant.name));
    write_json_file(file, out);
    fmt::print("linearity: -> {}\n", file.string());
  });
}

// ---------------------------------------------------------------- plan

void add_plan(CLI::App& app) {
  struct Opts {
    Common common;
    std::string scenario;
    std::string model_dir;
    double lpf_fc = 0.5;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("plan", "Solve one NMPC-DCBF problem from rest at the scenario start");
  o->common.add(sub);
  sub->add_option("--scenario", o->scenario,
                                   "Scenario JSON; defaults to the built-in arch scenario (config key: scenario, "
                                   "a path or an object); NMPC settings come from config key nmpc")
      ->check(CLI::ExistingFile);
  auto* model_dir = sub->add_option("--models", o->model_dir,
                                    "Directory with fit_<channel>.json for all four channels; defaults to the "
                                    "built-in models (config key: models)");
  auto* lpf = sub->add_option("--lpf", o->lpf_fc, "Command low-pass cutoff in Hz (config key: lpf)")->capture_default_str();
  sub->callback([o, model_dir, lpf] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(model_dir, "models", o->model_dir);
    c.cfg.merge(lpf, "lpf", o->lpf_fc);
    const Scenario sc = load_scenario(c.cfg, o->scenario);
    const NmpcParams params = load_nmpc(c.cfg);
    const StateSpaceModel model = planner_model(load_models(o->model_dir), o->lpf_fc, params.dt);
    const auto path = global_path(sc);
    const Eigen::Vector2d from(sc.start.x, sc.start.y);
    const std::size_t k = furthest_visible(path, 0, from, sc.obstacles, inflation_radius(sc));
    Pose2 target{path[k].x(), path[k].y(), sc.goal.yaw};
    if (k + 1 < path.size()) target.yaw = std::atan2(path[k].y() - from.y(), path[k].x() - from.x());
    const NmpcProblem problem =
        build_problem(sc, model, params, model.equilibrium(params.u_nominal), sc.start, target);
    const PlanResult plan = solve(problem);

    std::ostringstream csv;
    write_plan_csv(csv, plan, params.dt);
    write_file_atomic(c.path("plan.csv"), csv.str());
    Json out = to_json(plan, false);
    out["target"] = {{"x", target.x}, {"y", target.y}, {"yaw", target.yaw}};
    write_json_file(c.path("plan.json"), out);
    fmt::print("plan: {} after {} SQP iterations, cost {:.4f}, solve {:.3f} s -> {}\n", to_string(plan.status),
               plan.sqp_iterations, plan.cost, plan.solve_time, c.path("plan.csv").string());
    if (plan.status == PlanStatus::InfeasibleQp) throw PlanningError("plan: QP subproblem infeasible");
  });
}

// ---------------------------------------------------------------- navigate

void add_navigate(CLI::App& app) {
  struct Opts {
    Common common;
    std::string scenario;
    std::string profile = "cnn";
    std::string model_dir;
    int seeds = 1;
    double max_time = 60.0;
    double position_jitter = 0.2;
    double yaw_jitter = 0.1;
    double replan_rate = 5.0;
    double lpf_fc = 0.5;
    double sim_dt = 0.002;
    double goal_tolerance = 0.3;
    int threads = 1;
    int csv_stride = 1;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("navigate", "Closed-loop navigation episodes on the surrogate plant");
  o->common.add(sub);
  sub->add_option("--scenario", o->scenario,
                                   "Scenario JSON; defaults to the built-in arch scenario (config key: scenario); "
                                   "NMPC settings come from config key nmpc")
      ->check(CLI::ExistingFile);
  auto* profile = sub->add_option("--profile", o->profile, "Plant profile (config key: profile)")->capture_default_str();
  auto* model_dir = sub->add_option("--models", o->model_dir,
                                    "Directory with fit_<channel>.json used by planner and filter (config key: models)");
  auto* seeds = sub->add_option("--seeds", o->seeds, "Episodes, seeded seed .. seed+k-1 (config key: seeds)")
                    ->capture_default_str();
  auto* max_time = sub->add_option("--max-time", o->max_time, "Simulated time limit in s (config key: max_time)")
                       ->capture_default_str();
  auto* pj = sub->add_option("--position-jitter", o->position_jitter,
                             "Start position perturbation half-width in m (config key: position_jitter)")
                 ->capture_default_str();
  auto* yj = sub->add_option("--yaw-jitter", o->yaw_jitter, "Start yaw perturbation half-width in rad (config key: yaw_jitter)")
                 ->capture_default_str();
  auto* rate = sub->add_option("--replan-rate", o->replan_rate, "Replanning rate in Hz (config key: replan_rate)")
                   ->capture_default_str();
  auto* lpf = sub->add_option("--lpf", o->lpf_fc, "Command low-pass cutoff in Hz (config key: lpf)")->capture_default_str();
  auto* sim_dt = sub->add_option("--sim-dt", o->sim_dt, "Simulation step in s (config key: sim_dt)")->capture_default_str();
  auto* tol = sub->add_option("--goal-tolerance", o->goal_tolerance, "Goal radius in m (config key: goal_tolerance)")
                  ->capture_default_str();
  auto* threads = sub->add_option("--threads", o->threads, "Episodes run in parallel (config key: threads)")
                      ->capture_default_str();
  auto* stride = sub->add_option("--csv-stride", o->csv_stride, "Write every n-th simulation step (config key: csv_stride)")
                     ->capture_default_str();
  sub->callback([o, profile, model_dir, seeds, max_time, pj, yj, rate, lpf, sim_dt, tol, threads, stride] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(model_dir, "models", o->model_dir);
    c.cfg.merge(seeds, "seeds", o->seeds);
    c.cfg.merge(max_time, "max_time", o->max_time);
    c.cfg.merge(pj, "position_jitter", o->position_jitter);
    c.cfg.merge(yj, "yaw_jitter", o->yaw_jitter);
    c.cfg.merge(rate, "replan_rate", o->replan_rate);
    c.cfg.merge(lpf, "lpf", o->lpf_fc);
    c.cfg.merge(sim_dt, "sim_dt", o->sim_dt);
    c.cfg.merge(tol, "goal_tolerance", o->goal_tolerance);
    c.cfg.merge(threads, "threads", o->threads);
    c.cfg.merge(stride, "csv_stride", o->csv_stride);
    if (o->seeds < 1) throw ValidationError("seeds: must be >= 1");
    if (o->csv_stride < 1) throw ValidationError("csv_stride: must be >= 1");

    EpisodeConfig base;
    base.scenario = load_scenario(c.cfg, o->scenario);
    base.plant = load_profile(c.cfg, o->profile, profile);
    base.model = load_models(o->model_dir);
    base.nmpc = load_nmpc(c.cfg);
    base.replan_rate = o->replan_rate;
    base.command_lpf_fc = o->lpf_fc;
    base.sim_dt = o->sim_dt;
    base.max_sim_time = o->max_time;
    base.goal_tolerance = o->goal_tolerance;
    base.start_position_jitter = o->position_jitter;
    base.start_yaw_jitter = o->yaw_jitter;
    base.validate();
    std::vector<EpisodeConfig> configs;
    for (int i = 0; i < o->seeds; ++i) {
      configs.push_back(base);
      configs.back().seed = c.seed + static_cast<std::uint64_t>(i);
    }
    const std::vector<EpisodeLog> logs = run_episodes(configs, o->threads);

    Json timing{{"episodes", Json::array()}};
    for (std::size_t i = 0; i < logs.size(); ++i) {
      std::ostringstream csv;
      write_episode_csv(csv, logs[i], o->csv_stride);
      write_file_atomic(c.path(fmt::format("episode_{}.csv", i)), csv.str());
      write_json_file(c.path(fmt::format("episode_{}.json", i)), to_json(logs[i], false));
      timing["episodes"].push_back({{"seed", logs[i].seed}, {"solve_times_s", logs[i].solve_times()}});
    }
    const BatchReport report = batch_report(logs);
    write_json_file(c.path("summary.json"), to_json(report, false));
    timing["aggregate"] = to_json(report, true)["aggregate"];
    write_json_file(c.path("timing.json"), timing);
    for (const EpisodeSummary& e : report.episodes) {
      fmt::print("episode seed {}: {} at {:.2f} s, min clearance {:.3f} m, p95 solve {:.3f} s\n", e.seed,
                 to_string(e.outcome), e.completion_time, e.min_clearance, e.p95_solve_time);
    }
    fmt::print("navigate: {}/{} reached, {} collisions, p95 solve {:.3f} s -> {}\n", report.reached,
               logs.size(), report.collisions, report.p95_solve_time, c.path("summary.json").string());
  });
}

// ---------------------------------------------------------------- report

void add_report(CLI::App& app) {
  struct Opts {
    Common common;
    std::string dir;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("report", "Aggregate episode_<i>.json (and timing.json) from a navigate run");
  o->common.add(sub);
  auto* dir = sub->add_option("--dir", o->dir, "Directory written by navigate; defaults to --out (config key: dir)");
  sub->callback([o, dir] {
    Common& c = o->common;
    c.load();
    c.cfg.merge(dir, "dir", o->dir);
    const fs::path in = o->dir.empty() ? fs::path(c.out) : fs::path(o->dir);
    const std::regex pattern(R"(episode_(\d+)\.json)");
    std::vector<std::pair<int, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(in)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoi(m[1].str()), entry.path());
    }
    if (files.empty()) throw ValidationError(fmt::format("dir: no episode_<i>.json in '{}'", in.string()));
    std::sort(files.begin(), files.end());
    std::optional<Json> timing;
    if (fs::exists(in / "timing.json")) timing = read_json_file(in / "timing.json");
    std::vector<EpisodeLog> logs;
    for (const auto& [i, path] : files) {
      const Json* t = nullptr;
      if (timing && static_cast<std::size_t>(i) < (*timing)["episodes"].size()) t = &(*timing)["episodes"][i];
      logs.push_back(parse_episode_log(read_json_file(path), t));
    }
    const BatchReport report = batch_report(logs);
    fmt::print("{:>6} {:>10} {:>10} {:>12} {:>10} {:>10}\n", "seed", "outcome", "time_s", "clearance_m",
               "mean_s", "p95_s");
    for (const EpisodeSummary& e : report.episodes) {
      fmt::print("{:>6} {:>10} {:>10.2f} {:>12.3f} {:>10.4f} {:>10.4f}\n", e.seed, to_string(e.outcome),
                 e.completion_time, e.min_clearance, e.mean_solve_time, e.p95_solve_time);
    }
    fmt::print("{:>6} {:>10} {:>10.2f} {:>12.3f} {:>10.4f} {:>10.4f}\n", "all",
               fmt::format("{}/{}", report.reached, report.episodes.size()), report.mean_completion_time,
               report.min_clearance, report.mean_solve_time, report.p95_solve_time);
    write_json_file(c.path("report.json"), to_json(report, timing.has_value()));
  });
}

}  // namespace

void register_commands(CLI::App& app) {
  add_excite(app);
  add_fit(app);
  add_analyze(app);
  add_decouple(app);
  add_linearity(app);
  add_plan(app);
  add_navigate(app);
  add_report(app);
}

}  // namespace clsid::cli
