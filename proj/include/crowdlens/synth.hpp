#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "crowdlens/model.hpp"

namespace crowdlens {

/// A deviation injected into the synthetic city. Grid indices count hours from
/// the synthetic origin (index = day * 24 + hour).
struct PlantedEvent {
  std::vector<std::string> participants;  // chosen by the generator when empty
  std::size_t n_participants = 60;
  std::vector<std::pair<GridIndex, std::string>> chain;  // chosen by the generator when empty
  double call_probability = 0.8;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t n_users = 5000;
  std::size_t n_antennas = 50;
  std::size_t n_days = 14;
  /// Events placed by the generator in addition to `events`.
  std::size_t n_random_events = 3;
  std::vector<PlantedEvent> events;
  /// Midnight UTC of day 0.
  TimePoint origin = 1420416000;  // 2015-01-05T00:00:00Z
  /// Bounding box of the antenna layout.
  double lon_min = -4.10, lon_max = -3.90, lat_min = 5.25, lat_max = 5.45;
  double worker_share = 0.85;
  double excursion_probability = 0.04;
  /// Planted participants are chosen so that, on the full-window profile,
  /// every component of their profile vector along the event chain stays at
  /// or below this bound.
  double leak_bound = 0.2;
  int event_hours = 5;
  /// Keep only the earliest rows (0 = all).
  std::size_t max_rows = 0;
};

/// Per-hour-of-day call probability of the routine process.
double routine_call_probability(int hour_of_day);

struct SynthSummary {
  std::size_t rows = 0;
  std::size_t users = 0;
  std::size_t antennas = 0;
  std::size_t events = 0;
};

/// Writes calls.csv, antennas.csv and ground_truth.json contents. The same
/// config always produces the same bytes.
SynthSummary generate(const SynthConfig& config, std::ostream& calls_csv, std::ostream& antennas_csv,
                      std::ostream& ground_truth_json);

struct SynthOutput {
  std::string calls_csv;
  std::string antennas_csv;
  std::string ground_truth_json;
  SynthSummary summary;
};
SynthOutput generate(const SynthConfig& config);

/// Writes the three files into `dir` (created if needed).
SynthSummary generate_to_directory(const SynthConfig& config, const std::string& dir);

}  // namespace crowdlens
