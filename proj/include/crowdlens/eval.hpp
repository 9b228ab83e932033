#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdlens/pipeline.hpp"

namespace crowdlens {

struct TruthEvent {
  std::string event_id;
  TimePoint start = 0;
  TimePoint end = 0;
  std::vector<std::string> antenna_ids;
  std::vector<std::string> participants;  // sorted
};

struct DetectedEvent {
  TimePoint start = 0;
  TimePoint end = 0;
  std::vector<std::string> participants;  // sorted
};

/// Spans intersect and the detection covers at least half of the planted participants.
bool matches(const DetectedEvent& detected, const TruthEvent& truth);

struct EvalResult {
  std::size_t matched = 0;             // truth events matched by at least one detection
  std::size_t matched_detections = 0;  // detections matching at least one truth event
  std::size_t detected = 0;
  std::size_t truth = 0;
  std::optional<double> precision;  // matched_detections / detected
  std::optional<double> recall;     // matched / truth
};

EvalResult eval_from_counts(std::size_t matched, std::size_t matched_detections, std::size_t detected, std::size_t truth);
EvalResult score(std::span<const DetectedEvent> detected, std::span<const TruthEvent> truth);

std::vector<TruthEvent> parse_ground_truth(std::istream& in);
/// Reads the events.json written by `detect`.
std::vector<DetectedEvent> parse_detected_events(std::istream& in);
std::vector<DetectedEvent> detected_events(const RunArtifacts& run, const UserDictionary& users);

std::string to_json(const EvalResult& result);

struct TimeSeries {
  std::vector<std::size_t> clusters;
  std::vector<std::size_t> candidate_crowds;
  std::vector<std::size_t> crowds;          // closed crowds active at t
  std::vector<std::size_t> unusual_crowds;  // active at t
  std::vector<std::size_t> unusual_events;  // active at t
  std::vector<std::size_t> active_users;
  std::vector<std::size_t> total_calls;
};

TimeSeries timeseries(const RunArtifacts& run);

struct AnalystStats {
  struct Cumulative {
    std::size_t clusters = 0, candidates = 0, crowds = 0, unusual_crowds = 0, events = 0;
  } cumulative;

  // Detections per timestamp: clusters at t; crowds, unusual crowds and events ending at t.
  std::vector<std::size_t> detected_clusters, detected_crowds, detected_unusual, detected_events;

  // Event monitoring, per timestamp; empty when the run had no candidates.
  // nullopt where nothing was alive at t.
  std::vector<std::optional<double>> max_lifetime, min_lifetime;
  std::vector<std::optional<double>> max_committed, min_committed;
  std::vector<std::optional<double>> max_users, min_users;
  std::vector<std::optional<double>> max_similarity, min_similarity;

  // Cluster monitoring, per timestamp.
  std::vector<std::optional<double>> max_cluster_size;
  std::vector<std::optional<double>> min_radius_km;

  Params params;
};

AnalystStats analyst_stats(const RunArtifacts& run, const AntennaRegistry& registry);

}  // namespace crowdlens
