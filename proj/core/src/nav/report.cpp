#include "clsid/nav/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "clsid/error.hpp"

namespace clsid {

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("percentile: empty sample");
  require(q >= 0.0 && q <= 100.0, "q", "must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EpisodeSummary summarize(const EpisodeLog& log) {
  EpisodeSummary s;
  s.seed = log.seed;
  s.outcome = log.outcome;
  s.min_clearance = log.min_clearance;
  s.completion_time = log.final_time;
  const std::vector<double> times = log.solve_times();
  s.replans = static_cast<int>(log.ticks.size());
  s.rejected_plans = static_cast<int>(
      std::count_if(log.ticks.begin(), log.ticks.end(), [](const ReplanTick& t) { return !t.accepted; }));
  if (!times.empty()) {
    s.mean_solve_time = mean(times);
    s.p95_solve_time = percentile(times, 95.0);
    s.max_solve_time = *std::max_element(times.begin(), times.end());
  }
  return s;
}

BatchReport batch_report(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw ValidationError("batch_report: no episode logs");
  BatchReport r;
  r.min_clearance = std::numeric_limits<double>::infinity();
  std::vector<double> all_times;
  std::vector<double> completion;
  for (const EpisodeLog& log : logs) {
    r.episodes.push_back(summarize(log));
    r.reached += log.outcome == Outcome::Reached ? 1 : 0;
    r.collisions += log.outcome == Outcome::Collision ? 1 : 0;
    r.min_clearance = std::min(r.min_clearance, log.min_clearance);
    completion.push_back(log.final_time);
    const auto t = log.solve_times();
    all_times.insert(all_times.end(), t.begin(), t.end());
  }
  r.mean_completion_time = mean(completion);
  if (!all_times.empty()) {
    r.mean_solve_time = mean(all_times);
    r.p95_solve_time = percentile(all_times, 95.0);
  }
  return r;
}

nlohmann::json to_json(const BatchReport& report, bool with_timing) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json rows = nlohmann::json::array();
  for (const EpisodeSummary& e : report.episodes) {
    nlohmann::json row{{"seed", e.seed},
                       {"outcome", to_string(e.outcome)},
                       {"min_clearance_m", finite_or_null(e.min_clearance)},
                       {"completion_time_s", e.completion_time},
                       {"replans", e.replans},
                       {"rejected_plans", e.rejected_plans}};
    if (with_timing) {
      row["mean_solve_time_s"] = e.mean_solve_time;
      row["p95_solve_time_s"] = e.p95_solve_time;
      row["max_solve_time_s"] = e.max_solve_time;
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json agg{{"episodes", report.episodes.size()},
                     {"reached", report.reached},
                     {"collisions", report.collisions},
                     {"min_clearance_m", finite_or_null(report.min_clearance)},
                     {"mean_completion_time_s", report.mean_completion_time}};
  if (with_timing) {
    agg["mean_solve_time_s"] = report.mean_solve_time;
    agg["p95_solve_time_s"] = report.p95_solve_time;
  }
  return {{"episodes", rows}, {"aggregate", agg}};
}

}  // namespace clsid
