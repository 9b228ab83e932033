#pragma once

#include <functional>
#include <vector>

#include "crowdlens/clusterer.hpp"
#include "crowdlens/crowd_miner.hpp"

namespace crowdlens {

/// Exhaustive reference for mine_closed_crowds on small instances (at most 8
/// antennas, 12 timestamps and 20 users); throws above those bounds. Uses
/// exact rational arithmetic for existence probabilities.
std::vector<Crowd> oracle_mine(const ClusterDB& db, const Params& params);

/// Connected components by BFS over the explicit adjacency matrix of `n`
/// nodes (n <= 100). Components and their members are sorted.
std::vector<std::vector<std::size_t>> oracle_components(std::size_t n,
                                                        const std::function<bool(std::size_t, std::size_t)>& connected);

}  // namespace crowdlens
