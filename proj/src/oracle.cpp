#include "crowdlens/oracle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

namespace crowdlens {
namespace {

using Rational = boost::multiprecision::cpp_rational;

struct UserState {
  Rational probability;
  bool dropped = false;
  std::vector<Rational> history;  // one entry per chain position
};

// Definition-level evaluation of one chain, position by position.
struct ChainEval {
  std::vector<const CylindricalCluster*> clusters;
  std::map<std::uint32_t, UserState> users;
};

Rational threshold_of(double value) { return Rational(value) - Rational(1, 1000000000); }

bool observed(const CylindricalCluster& c, UserId u) {
  return std::find(c.members.begin(), c.members.end(), u) != c.members.end();
}

std::size_t committed_count(const ChainEval& e) {
  std::size_t n = 0;
  for (const auto& [u, s] : e.users)
    if (!s.dropped) ++n;
  return n;
}

// Applies one more cluster to the evaluation; false when the commitment
// condition fails at this position.
bool extend(ChainEval& e, const CylindricalCluster& next, const Params& params) {
  const Rational eps_p = threshold_of(params.commitment_probability);
  const std::size_t k = e.clusters.size();
  if (k == 0) {
    e.clusters.push_back(&next);
    for (const auto u : next.members) e.users[u.value] = UserState{Rational(1), false, {Rational(1)}};
    return committed_count(e) >= static_cast<std::size_t>(std::max(params.commitment, 0));
  }
  const auto& prev = *e.clusters.back();
  std::size_t carried = 0;
  for (const auto u : prev.members)
    if (observed(next, u)) ++carried;
  const Rational ratio(static_cast<long>(carried), static_cast<long>(prev.members.size()));
  if (ratio < eps_p) return false;

  for (auto& [id, s] : e.users) {
    if (s.dropped) continue;
    s.probability = observed(next, UserId{id}) ? Rational(1) : s.probability * ratio;
    if (s.probability < eps_p) {
      s.dropped = true;
      s.history.push_back(Rational(0));
    } else {
      s.history.push_back(s.probability);
    }
  }
  for (const auto u : next.members) {
    if (e.users.contains(u.value)) continue;
    UserState s{Rational(1), false, std::vector<Rational>(k, Rational(0))};
    s.history.push_back(Rational(1));
    e.users.emplace(u.value, std::move(s));
  }
  e.clusters.push_back(&next);
  return committed_count(e) >= static_cast<std::size_t>(std::max(params.commitment, 0));
}

struct Found {
  std::vector<ChainLink> chain;
  ChainEval eval;
};

void enumerate(const ClusterDB& db, const Params& params, ChainEval eval, std::vector<ChainLink> chain,
               std::vector<Found>& out) {
  std::set<AntennaId> distinct;
  for (const auto& l : chain) distinct.insert(l.antenna);
  if (static_cast<int>(chain.size()) >= params.lifetime && static_cast<int>(distinct.size()) >= params.min_locations)
    out.push_back(Found{chain, eval});
  const GridIndex t = chain.back().t + 1;
  if (t >= db.n_steps()) return;
  for (const auto& c : db.at(t)) {
    ChainEval next = eval;
    if (!extend(next, c, params)) continue;
    auto longer = chain;
    longer.push_back({t, c.antenna});
    enumerate(db, params, std::move(next), std::move(longer), out);
  }
}

}  // namespace

std::vector<Crowd> oracle_mine(const ClusterDB& db, const Params& params) {
  std::set<AntennaId> antennas;
  std::set<UserId> users;
  for (GridIndex t = 0; t < db.n_steps(); ++t)
    for (const auto& c : db.at(t)) {
      antennas.insert(c.antenna);
      users.insert(c.members.begin(), c.members.end());
    }
  if (db.n_steps() > 12 || antennas.size() > 8 || users.size() > 20) throw Error("oracle_mine: instance too large");

  std::vector<Found> valid;
  for (GridIndex t = 0; t < db.n_steps(); ++t)
    for (const auto& c : db.at(t)) {
      ChainEval e;
      if (!extend(e, c, params)) continue;
      enumerate(db, params, std::move(e), {{t, c.antenna}}, valid);
    }

  std::vector<Crowd> out;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    const auto& a = valid[i].chain;
    bool closed = true;
    for (std::size_t j = 0; j < valid.size() && closed; ++j) {
      const auto& b = valid[j].chain;
      if (j == i || b.size() <= a.size()) continue;
      for (std::size_t off = 0; off + a.size() <= b.size(); ++off)
        if (std::equal(a.begin(), a.end(), b.begin() + static_cast<std::ptrdiff_t>(off))) closed = false;
    }
    if (!closed) continue;

    Crowd crowd;
    crowd.chain = a;
    crowd.start = a.front().t;
    crowd.end = a.back().t;
    crowd.lifetime = static_cast<int>(a.size());
    std::set<AntennaId> distinct;
    for (const auto& l : a) distinct.insert(l.antenna);
    crowd.distinct_antennas = static_cast<int>(distinct.size());
    for (const auto& [id, s] : valid[i].eval.users) {
      if (s.dropped) continue;
      crowd.committed.push_back(UserId{id});
      std::vector<double> h;
      for (const auto& p : s.history) h.push_back(p.convert_to<double>());
      crowd.existence.push_back(std::move(h));
    }
    out.push_back(std::move(crowd));
  }
  std::sort(out.begin(), out.end(), [](const Crowd& x, const Crowd& y) {
    if (x.start != y.start) return x.start < y.start;
    return std::lexicographical_compare(x.chain.begin(), x.chain.end(), y.chain.begin(), y.chain.end(),
                                        [](const ChainLink& p, const ChainLink& q) { return p.antenna < q.antenna; });
  });
  return out;
}

std::vector<std::vector<std::size_t>> oracle_components(std::size_t n,
                                                        const std::function<bool(std::size_t, std::size_t)>& connected) {
  if (n > 100) throw Error("oracle_components: too many nodes");
  std::vector<std::vector<bool>> adjacency(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) adjacency[i][j] = connected(i, j);

  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    std::deque<std::size_t> queue{s};
    seen[s] = true;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (std::size_t w = 0; w < n; ++w)
        if (adjacency[v][w] && !seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

}  // namespace crowdlens
