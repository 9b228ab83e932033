#include "crowdlens/pipeline.hpp"

#include <algorithm>

namespace crowdlens {

RunArtifacts run_detection(const Dataset& dataset, const Params& params, const ProfileStore* profiles) {
  if (const auto violations = validate_params(params); !violations.empty()) throw Error("invalid parameters: " + violations.front());

  const CallIndex* index = &dataset.calls.index;
  CallIndex reindexed;
  if (index->grid().half_window != params.half_window && !dataset.calls.calls.empty()) {
    const auto [lo, hi] = std::minmax_element(dataset.calls.calls.begin(), dataset.calls.calls.end(),
                                              [](const Call& a, const Call& b) { return a.at < b.at; });
    reindexed = CallIndex(infer_grid(lo->at, hi->at, index->grid().step, params.half_window));
    IngestReport ignored;
    index_calls(dataset.calls.calls, reindexed, ignored);
    index = &reindexed;
  }

  RunArtifacts run;
  run.params = params;
  run.grid = index->grid();
  run.clusters = cluster_stream(*index, params);
  run.crowds = mine_closed_crowds(run.clusters, params, &run.trace);

  ProfileStore built;
  if (!profiles) {
    built = build_profiles(dataset.calls.calls, run.grid, dataset.calls.users.size());
    profiles = &built;
  }
  for (const auto& crowd : run.crowds) {
    run.classifications.push_back(classify_unusual(crowd, *profiles, params));
    if (run.classifications.back().unusual) {
      run.unusual.push_back(crowd);
      run.unusual_similarity.push_back(run.classifications.back().report.mean);
    }
  }
  run.events = build_events(run.unusual, &dataset.antennas);

  const auto n = static_cast<std::size_t>(run.grid.n_steps);
  run.active_users.assign(n, 0);
  run.total_calls.assign(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const auto obs = index->at(static_cast<GridIndex>(t));
    run.total_calls[t] = obs.size();
    for (std::size_t i = 0; i < obs.size(); ++i)
      if (i == 0 || obs[i].user != obs[i - 1].user) ++run.active_users[t];
  }
  return run;
}

}  // namespace crowdlens
