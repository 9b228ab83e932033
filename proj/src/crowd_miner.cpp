#include "crowdlens/crowd_miner.hpp"

#include <algorithm>
#include <unordered_map>

namespace crowdlens {
namespace {

std::size_t intersection_size(std::span<const UserId> a, std::span<const UserId> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

bool contains(std::span<const UserId> sorted, UserId u) { return std::binary_search(sorted.begin(), sorted.end(), u); }

// Advances `state` from cluster `prev` to cluster `next`. Returns false when
// the carry ratio misses eps_p.
bool advance(const ExistenceState& state, std::span<const UserId> prev, std::span<const UserId> next,
             const Params& params, ExistenceState& out) {
  const std::size_t carried = intersection_size(prev, next);
  const double ratio = static_cast<double>(carried) / static_cast<double>(prev.size());
  if (!reaches(ratio, params.commitment_probability)) return false;

  out.alive.clear();
  out.alive.reserve(state.alive.size() + next.size());
  std::vector<UserId> newly_dropped;
  auto n = next.begin();
  for (const auto& tracked : state.alive) {
    while (n != next.end() && *n < tracked.user) {
      if (!contains(state.dropped, *n)) out.alive.push_back({*n, 1.0});
      ++n;
    }
    const bool observed = n != next.end() && *n == tracked.user;
    if (observed) ++n;
    const double p = existence_step(tracked.probability, carried, prev.size(), observed);
    if (reaches(p, params.commitment_probability)) {
      out.alive.push_back({tracked.user, p});
    } else {
      newly_dropped.push_back(tracked.user);
    }
  }
  for (; n != next.end(); ++n)
    if (!contains(state.dropped, *n)) out.alive.push_back({*n, 1.0});

  out.dropped.clear();
  out.dropped.reserve(state.dropped.size() + newly_dropped.size());
  std::merge(state.dropped.begin(), state.dropped.end(), newly_dropped.begin(), newly_dropped.end(),
             std::back_inserter(out.dropped));
  return true;
}

bool admissible(const ExistenceState& s, const Params& params) {
  return s.alive.size() >= static_cast<std::size_t>(std::max(params.commitment, 0));
}

int count_distinct_antennas(std::span<const ChainLink> chain) {
  std::vector<AntennaId> ids;
  ids.reserve(chain.size());
  for (const auto& l : chain) ids.push_back(l.antenna);
  std::sort(ids.begin(), ids.end());
  return static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

bool satisfies_shape(const CandidateCrowd& c, const Params& params) {
  return c.lifetime() >= params.lifetime && count_distinct_antennas(c.chain) >= params.min_locations;
}

void record(CandidateStats& s, const CandidateCrowd& c) {
  const int lt = c.lifetime();
  const std::size_t committed = c.existence.alive.size();
  const std::size_t users = committed + c.existence.dropped.size();
  if (s.candidates == 0) {
    s.min_lifetime = s.max_lifetime = lt;
    s.min_committed = s.max_committed = committed;
    s.min_users = s.max_users = users;
  } else {
    s.min_lifetime = std::min(s.min_lifetime, lt);
    s.max_lifetime = std::max(s.max_lifetime, lt);
    s.min_committed = std::min(s.min_committed, committed);
    s.max_committed = std::max(s.max_committed, committed);
    s.min_users = std::min(s.min_users, users);
    s.max_users = std::max(s.max_users, users);
  }
  ++s.candidates;
}

}  // namespace

double existence_step(double prev_prob, std::size_t carried, std::size_t prev_cluster_size, bool observed_now) {
  if (prev_cluster_size == 0) throw Error("existence_step: previous cluster is empty");
  if (carried > prev_cluster_size) throw Error("existence_step: carried exceeds previous cluster size");
  if (observed_now) return 1.0;
  return prev_prob * (static_cast<double>(carried) / static_cast<double>(prev_cluster_size));
}

double carry_ratio(std::span<const UserId> previous, std::span<const UserId> next) {
  if (previous.empty()) throw Error("carry_ratio: previous cluster is empty");
  return static_cast<double>(intersection_size(previous, next)) / static_cast<double>(previous.size());
}

CandidateCrowd seed_candidate(const ClusterDB& db, GridIndex t, std::uint32_t cluster_pos) {
  const auto& cl = db.at(t, cluster_pos);
  CandidateCrowd c;
  c.chain.push_back({t, cl.antenna});
  c.cluster_pos.push_back(cluster_pos);
  c.existence.alive.reserve(cl.members.size());
  for (const auto u : cl.members) c.existence.alive.push_back({u, 1.0});
  return c;
}

std::vector<Extension> candidate_cluster_search(const ClusterDB& db, const CandidateCrowd& candidate, GridIndex t,
                                                const Params& params) {
  std::vector<Extension> out;
  if (t != candidate.end() + 1 || t >= db.n_steps()) return out;
  const auto& prev = db.at(candidate.end(), candidate.cluster_pos.back());
  const auto clusters = db.at(t);
  ExistenceState next;
  for (std::uint32_t i = 0; i < clusters.size(); ++i) {
    if (!advance(candidate.existence, prev.members, clusters[i].members, params, next)) continue;
    if (!admissible(next, params)) continue;
    out.push_back(Extension{i, next});
  }
  return out;
}

bool is_subchain(std::span<const ChainLink> a, std::span<const ChainLink> b) {
  if (a.empty() || a.size() > b.size()) return a.empty();
  if (a.front().t < b.front().t || a.back().t > b.back().t) return false;
  const auto offset = static_cast<std::size_t>(a.front().t - b.front().t);
  return std::equal(a.begin(), a.end(), b.begin() + static_cast<std::ptrdiff_t>(offset));
}

bool is_closed(const Crowd& candidate, std::span<const Crowd> crowds_ending_at_same_t) {
  for (const auto& other : crowds_ending_at_same_t) {
    if (&other == &candidate) continue;
    if (is_subchain(candidate.chain, other.chain)) return false;
  }
  return true;
}

Crowd materialize_crowd(const ClusterDB& db, std::span<const ChainLink> chain, const Params& params) {
  if (chain.empty()) throw Error("materialize_crowd: empty chain");
  std::vector<const CylindricalCluster*> clusters;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (k > 0 && chain[k].t != chain[k - 1].t + 1) throw Error("materialize_crowd: chain is not consecutive");
    const auto pos = db.find(chain[k].t, chain[k].antenna);
    if (pos < 0) throw Error("materialize_crowd: chain references a missing cluster");
    clusters.push_back(&db.at(chain[k].t, static_cast<std::size_t>(pos)));
  }

  const std::size_t len = chain.size();
  std::unordered_map<std::uint32_t, std::vector<double>> history;
  ExistenceState state;
  for (const auto u : clusters[0]->members) {
    state.alive.push_back({u, 1.0});
    auto& h = history[u.value];
    h.assign(len, 0.0);
    h[0] = 1.0;
  }
  ExistenceState next;
  for (std::size_t k = 1; k < len; ++k) {
    if (!advance(state, clusters[k - 1]->members, clusters[k]->members, params, next) || !admissible(next, params))
      throw Error("materialize_crowd: chain is not admissible");
    std::swap(state, next);
    for (const auto& tracked : state.alive) {
      auto& h = history[tracked.user.value];
      if (h.empty()) h.assign(len, 0.0);
      h[k] = tracked.probability;
    }
  }

  Crowd crowd;
  crowd.chain.assign(chain.begin(), chain.end());
  crowd.start = chain.front().t;
  crowd.end = chain.back().t;
  crowd.lifetime = static_cast<int>(len);
  crowd.distinct_antennas = count_distinct_antennas(chain);
  for (const auto& tracked : state.alive) {
    crowd.committed.push_back(tracked.user);
    crowd.existence.push_back(std::move(history[tracked.user.value]));
  }
  return crowd;
}

std::vector<Crowd> mine_closed_crowds(const ClusterDB& db, const Params& params, MinerTrace* trace) {
  const GridIndex n = db.n_steps();
  if (trace) trace->per_t.assign(static_cast<std::size_t>(n), CandidateStats{});

  // Terminal candidates satisfying movement and durability, bucketed by end.
  std::vector<std::vector<CandidateCrowd>> terminal_by_end(static_cast<std::size_t>(std::max(n, 0)));
  std::vector<CandidateCrowd> active;

  const auto close_bucket = [&](GridIndex end) {
    auto& bucket = terminal_by_end[static_cast<std::size_t>(end)];
    std::vector<CandidateCrowd> kept;
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      bool closed = true;
      for (std::size_t j = 0; j < bucket.size() && closed; ++j)
        if (i != j && is_subchain(bucket[i].chain, bucket[j].chain)) closed = false;
      if (closed) kept.push_back(std::move(bucket[i]));
    }
    bucket = std::move(kept);
  };

  for (GridIndex t = 0; t < n; ++t) {
    std::vector<CandidateCrowd> next;
    for (auto& cand : active) {
      auto extensions = candidate_cluster_search(db, cand, t, params);
      if (extensions.empty()) {
        if (satisfies_shape(cand, params)) terminal_by_end[static_cast<std::size_t>(t - 1)].push_back(std::move(cand));
        continue;
      }
      for (auto& ext : extensions) {
        CandidateCrowd grown;
        grown.chain.reserve(cand.chain.size() + 1);
        grown.chain = cand.chain;
        grown.chain.push_back({t, db.at(t, ext.cluster_pos).antenna});
        grown.cluster_pos = cand.cluster_pos;
        grown.cluster_pos.push_back(ext.cluster_pos);
        grown.existence = std::move(ext.existence);
        next.push_back(std::move(grown));
      }
    }
    if (t > 0) close_bucket(t - 1);
    for (std::uint32_t i = 0; i < db.at(t).size(); ++i) next.push_back(seed_candidate(db, t, i));
    if (trace)
      for (const auto& c : next) record(trace->per_t[static_cast<std::size_t>(t)], c);
    active = std::move(next);
  }
  if (n > 0) {
    for (auto& cand : active)
      if (satisfies_shape(cand, params)) terminal_by_end[static_cast<std::size_t>(n - 1)].push_back(std::move(cand));
    close_bucket(n - 1);
  }

  // A terminal chain can still sit strictly inside a longer terminal chain
  // that ends later; drop those too.
  std::vector<const CandidateCrowd*> survivors;
  for (const auto& bucket : terminal_by_end)
    for (const auto& c : bucket) survivors.push_back(&c);
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_link;
  const auto key = [](const ChainLink& l) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(l.t)) << 32) | l.antenna.value;
  };
  for (std::size_t i = 0; i < survivors.size(); ++i)
    for (const auto& link : survivors[i]->chain) by_link[key(link)].push_back(i);

  std::vector<Crowd> out;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    const auto& chain = survivors[i]->chain;
    bool closed = true;
    for (const auto j : by_link[key(chain.front())]) {
      if (j != i && survivors[j]->chain.size() > chain.size() && is_subchain(chain, survivors[j]->chain)) {
        closed = false;
        break;
      }
    }
    if (closed) out.push_back(materialize_crowd(db, chain, params));
  }
  std::sort(out.begin(), out.end(), [](const Crowd& a, const Crowd& b) {
    if (a.start != b.start) return a.start < b.start;
    return std::lexicographical_compare(a.chain.begin(), a.chain.end(), b.chain.begin(), b.chain.end(),
                                        [](const ChainLink& x, const ChainLink& y) { return x.antenna < y.antenna; });
  });
  return out;
}

}  // namespace crowdlens
