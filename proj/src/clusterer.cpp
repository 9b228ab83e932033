#include "crowdlens/clusterer.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <json.hpp>

namespace crowdlens {
namespace {

struct Tally {
  AntennaId antenna;
  std::uint32_t count = 0;
  TimePoint earliest = 0;
};

// Strict preference order of the position rule.
bool better(const Tally& a, const Tally& b) {
  if (a.count != b.count) return a.count > b.count;
  if (a.earliest != b.earliest) return a.earliest < b.earliest;
  return a.antenna < b.antenna;
}

}  // namespace

AntennaId resolve_position(const std::map<AntennaId, std::vector<TimePoint>>& observations) {
  std::optional<Tally> best;
  for (const auto& [antenna, times] : observations) {
    if (times.empty()) continue;
    const Tally t{antenna, static_cast<std::uint32_t>(times.size()), *std::min_element(times.begin(), times.end())};
    if (!best || better(t, *best)) best = t;
  }
  if (!best) throw Error("resolve_position: no observations");
  return best->antenna;
}

std::vector<CylindricalCluster> detect_clusters(const CallIndex& index, GridIndex t, const Params& params) {
  const auto obs = index.at(t);
  // (antenna, user, calls at that antenna) for each user's resolved position.
  struct Resolved {
    AntennaId antenna;
    UserId user;
    std::uint32_t calls;
  };
  std::vector<Resolved> resolved;
  for (std::size_t i = 0; i < obs.size();) {
    const UserId user = obs[i].user;
    std::optional<Tally> best;
    while (i < obs.size() && obs[i].user == user) {
      Tally tally{obs[i].antenna, 0, obs[i].at};  // observations sorted by time within an antenna
      while (i < obs.size() && obs[i].user == user && obs[i].antenna == tally.antenna) {
        ++tally.count;
        ++i;
      }
      if (!best || better(tally, *best)) best = tally;
    }
    resolved.push_back(Resolved{best->antenna, user, best->count});
  }
  std::sort(resolved.begin(), resolved.end(),
            [](const Resolved& a, const Resolved& b) { return std::tie(a.antenna, a.user) < std::tie(b.antenna, b.user); });

  std::vector<CylindricalCluster> clusters;
  for (std::size_t i = 0; i < resolved.size();) {
    std::size_t j = i;
    while (j < resolved.size() && resolved[j].antenna == resolved[i].antenna) ++j;
    if (j - i >= static_cast<std::size_t>(std::max(params.scale, 1))) {
      CylindricalCluster c{t, resolved[i].antenna, {}, {}};
      c.members.reserve(j - i);
      c.call_counts.reserve(j - i);
      for (std::size_t k = i; k < j; ++k) {
        c.members.push_back(resolved[k].user);
        c.call_counts.push_back(resolved[k].calls);
      }
      clusters.push_back(std::move(c));
    }
    i = j;
  }
  return clusters;
}

std::ptrdiff_t ClusterDB::find(GridIndex t, AntennaId antenna) const {
  if (t < 0 || t >= n_steps()) return -1;
  const auto& slot = by_t_[static_cast<std::size_t>(t)];
  const auto it = std::lower_bound(slot.begin(), slot.end(), antenna,
                                   [](const CylindricalCluster& c, AntennaId a) { return c.antenna < a; });
  if (it == slot.end() || it->antenna != antenna) return -1;
  return it - slot.begin();
}

std::size_t ClusterDB::total() const {
  std::size_t n = 0;
  for (const auto& slot : by_t_) n += slot.size();
  return n;
}

ClusterDB cluster_stream(const CallIndex& index, const Params& params, unsigned threads) {
  const auto n = static_cast<std::size_t>(index.grid().n_steps);
  std::vector<std::vector<CylindricalCluster>> by_t(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t t = next++; t < n; t = next++) by_t[t] = detect_clusters(index, static_cast<GridIndex>(t), params);
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  return ClusterDB(std::move(by_t));
}

void dump_clusters(std::ostream& out, const ClusterDB& db, const AntennaRegistry& registry, const UserDictionary& users) {
  for (GridIndex t = 0; t < db.n_steps(); ++t) {
    for (const auto& c : db.at(t)) {
      nlohmann::ordered_json j;
      j["t"] = c.t;
      j["antenna_id"] = registry.name(c.antenna);
      auto& members = j["members"] = nlohmann::json::array();
      for (const auto u : c.members) members.push_back(users.name(u));
      out << j.dump() << '\n';
    }
  }
}

}  // namespace crowdlens
