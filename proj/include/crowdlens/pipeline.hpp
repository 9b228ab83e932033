#pragma once

#include <vector>

#include "crowdlens/clusterer.hpp"
#include "crowdlens/crowd_miner.hpp"
#include "crowdlens/events.hpp"
#include "crowdlens/ingest.hpp"
#include "crowdlens/profiler.hpp"

namespace crowdlens {

/// Everything one detection run produces.
struct RunArtifacts {
  Params params;
  TimeGrid grid;
  ClusterDB clusters;
  MinerTrace trace;
  std::vector<Crowd> crowds;
  std::vector<Classification> classifications;  // parallel to crowds
  std::vector<Crowd> unusual;                   // crowds classified unusual, in crowd order
  std::vector<double> unusual_similarity;       // parallel to unusual
  std::vector<UnusualEvent> events;             // crowd positions refer to `unusual`
  std::vector<std::size_t> active_users;        // per grid index
  std::vector<std::size_t> total_calls;         // per grid index
};

/// ingest index -> clusters -> closed crowds -> unusual crowds -> events.
/// Uses `profiles` when given, otherwise builds them from the dataset. The
/// dataset is re-indexed when params.half_window differs from its grid.
RunArtifacts run_detection(const Dataset& dataset, const Params& params, const ProfileStore* profiles = nullptr);

}  // namespace crowdlens
