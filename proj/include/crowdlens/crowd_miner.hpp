#pragma once

#include <span>
#include <vector>

#include "crowdlens/clusterer.hpp"
#include "crowdlens/model.hpp"

namespace crowdlens {

struct ChainLink {
  GridIndex t = 0;
  AntennaId antenna;
  friend constexpr auto operator<=>(const ChainLink&, const ChainLink&) = default;
};

struct TrackedUser {
  UserId user;
  double probability = 1.0;
};

/// Existence probabilities at the candidate's latest timestamp. `alive` holds
/// the users whose probability has stayed >= eps_p since they joined; `dropped`
/// users fell below it and are never tracked again within this candidate.
struct ExistenceState {
  std::vector<TrackedUser> alive;  // sorted by user
  std::vector<UserId> dropped;     // sorted
};

struct CandidateCrowd {
  std::vector<ChainLink> chain;
  std::vector<std::uint32_t> cluster_pos;  // position of each link's cluster in ClusterDB::at(t)
  ExistenceState existence;

  [[nodiscard]] GridIndex start() const { return chain.front().t; }
  [[nodiscard]] GridIndex end() const { return chain.back().t; }
  [[nodiscard]] int lifetime() const { return static_cast<int>(chain.size()); }
};

struct Crowd {
  std::vector<ChainLink> chain;
  GridIndex start = 0;
  GridIndex end = 0;
  int lifetime = 0;
  int distinct_antennas = 0;
  std::vector<UserId> committed;  // sorted
  /// existence[i][k]: probability of committed[i] at chain position k (0 before joining).
  std::vector<std::vector<double>> existence;

  friend bool operator==(const Crowd&, const Crowd&) = default;
};

/// prev_prob * carried / prev_cluster_size, or 1 when observed now.
double existence_step(double prev_prob, std::size_t carried, std::size_t prev_cluster_size, bool observed_now);

/// Fraction of `previous` members that are also in `next` (both sorted).
double carry_ratio(std::span<const UserId> previous, std::span<const UserId> next);

struct Extension {
  std::uint32_t cluster_pos = 0;
  ExistenceState existence;
};

/// Clusters at `t` == candidate.end() + 1 that the candidate may be extended
/// with, each with its advanced existence state.
std::vector<Extension> candidate_cluster_search(const ClusterDB& db, const CandidateCrowd& candidate, GridIndex t,
                                                const Params& params);

CandidateCrowd seed_candidate(const ClusterDB& db, GridIndex t, std::uint32_t cluster_pos);

/// True iff `a` occurs as a contiguous run inside `b`.
bool is_subchain(std::span<const ChainLink> a, std::span<const ChainLink> b);

/// Closedness against crowds ending at candidate.end (the caller's bucket):
/// false iff the candidate is a contiguous subsequence of one of them.
bool is_closed(const Crowd& candidate, std::span<const Crowd> crowds_ending_at_same_t);

/// Per-timestamp summary of the candidate set, for monitoring.
struct CandidateStats {
  std::size_t candidates = 0;
  int min_lifetime = 0, max_lifetime = 0;
  std::size_t min_committed = 0, max_committed = 0;
  std::size_t min_users = 0, max_users = 0;  // alive + dropped
};

struct MinerTrace {
  std::vector<CandidateStats> per_t;
};

/// Closed crowds: valid crowds (movement, durability, commitment at every
/// extension step) with no valid proper contiguous super-chain. Sorted by
/// (start, antenna sequence).
std::vector<Crowd> mine_closed_crowds(const ClusterDB& db, const Params& params, MinerTrace* trace = nullptr);

/// Re-derives a crowd (committed users and probability vectors) from a chain.
/// Throws when the chain is not admissible.
Crowd materialize_crowd(const ClusterDB& db, std::span<const ChainLink> chain, const Params& params);

}  // namespace crowdlens
