#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "clsid/nav/episode.hpp"

namespace clsid {

struct EpisodeSummary {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  double min_clearance = 0.0;    // m
  double completion_time = 0.0;  // s, final simulated time
  double mean_solve_time = 0.0;  // s
  double p95_solve_time = 0.0;   // s
  double max_solve_time = 0.0;   // s
  int replans = 0;
  int rejected_plans = 0;
};

struct BatchReport {
  std::vector<EpisodeSummary> episodes;
  int reached = 0;
  int collisions = 0;
  double min_clearance = 0.0;
  double mean_completion_time = 0.0;
  /// Over every replan of every episode.
  double mean_solve_time = 0.0;
  double p95_solve_time = 0.0;
};

/// Linear-interpolated percentile (q in [0, 100]) of a non-empty sample.
double percentile(std::vector<double> values, double q);

EpisodeSummary summarize(const EpisodeLog& log);

/// ValidationError on an empty list.
BatchReport batch_report(std::span<const EpisodeLog> logs);

/// Without solve times (reproducible) unless @p with_timing is set.
nlohmann::json to_json(const BatchReport& report, bool with_timing);

}  // namespace clsid
