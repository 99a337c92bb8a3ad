#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "clsid/lti/state_space.hpp"
#include "clsid/lti/transfer_function.hpp"
#include "clsid/nav/episode.hpp"
#include "clsid/planning/nmpc_problem.hpp"
#include "clsid/planning/scenario.hpp"
#include "clsid/plant/profile.hpp"
#include "clsid/signals/signal.hpp"
#include "clsid/sysid/decoupling.hpp"
#include "clsid/sysid/fit.hpp"
#include "clsid/sysid/linearity.hpp"
#include "clsid/sysid/order_selection.hpp"

namespace clsid {

using Json = nlohmann::json;

// Parsers start from defaults and override the keys present; a key of the
// wrong type raises ValidationError naming it.

/// {"num": [...], "den": [...]}, coefficients in descending powers of s.
TransferFunction parse_transfer_function(const Json& j);
/// Keys robot_radius, safety_buffer, obstacles [{x,y,r}],
/// height_regions [{xmin,xmax,ymin,ymax,hmax}], start and goal {x,y,yaw}.
Scenario parse_scenario(const Json& j);
/// "name" selects the preset; other keys override its fields.
PlantProfile parse_profile(const Json& j);
NmpcParams parse_nmpc_params(const Json& j);
SignalSpec parse_signal_spec(const Json& j);
FitConfig parse_fit_config(const Json& j, FitConfig base = {});

Json to_json(const TransferFunction& tf);
Json to_json(const StateSpaceModel& ss);
Json to_json(const Scenario& sc);
Json to_json(const PlantProfile& p);
Json to_json(const NmpcParams& p);
Json to_json(const FitResult& r);
Json to_json(const OrderSelection& s);
Json to_json(const DecouplingReport& r);
Json to_json(const LinearityReport& r);
Json to_json(const PlanResult& r, bool with_timing);
/// Episode outcome and statistics, without the per-step samples.
Json to_json(const EpisodeLog& log, bool with_timing);

/// Episode statistics written by to_json(EpisodeLog); solve times are read
/// from "solve_times_s" in @p timing when given.
EpisodeLog parse_episode_log(const Json& j, const Json* timing = nullptr);

/// Parsed file; ValidationError on malformed JSON.
Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed, written atomically.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace clsid
