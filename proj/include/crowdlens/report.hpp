#pragma once

#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "crowdlens/eval.hpp"
#include "crowdlens/pipeline.hpp"

namespace crowdlens {

using PoiTable = std::unordered_map<AntennaId, std::vector<std::string>>;

/// pois.csv: header `antenna_id,name`; rows naming unknown antennas are skipped.
PoiTable load_pois(std::istream& in, const AntennaRegistry& registry);

nlohmann::ordered_json params_to_json(const Params& p);
/// Applies `{"epsilon_n": .., "epsilon_lt": .., "epsilon_ci": .., "epsilon_p": ..,
/// "epsilon_si": .., "min_locations": .., "window_minutes": .., "holdout_crowd_span": ..}`
/// onto `base`. Throws Error on unknown keys or wrong types.
Params apply_overrides(const nlohmann::json& overrides, Params base);

nlohmann::ordered_json events_to_json(const RunArtifacts& run, const Dataset& dataset, const PoiTable* pois = nullptr);
nlohmann::ordered_json crowds_to_json(const RunArtifacts& run, const Dataset& dataset);
nlohmann::ordered_json timeseries_to_json(const TimeSeries& ts, const TimeGrid& grid);
std::string timeseries_to_csv(const TimeSeries& ts, const TimeGrid& grid);
nlohmann::ordered_json analyst_to_json(const AnalystStats& stats);
nlohmann::ordered_json summary_to_json(const RunArtifacts& run);

}  // namespace crowdlens
