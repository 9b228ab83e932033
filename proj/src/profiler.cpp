#include "crowdlens/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <json.hpp>

namespace crowdlens {
namespace {

constexpr int kProfileFormatVersion = 1;

void add_count(ProfileStore::UserProfile& p, int hour, AntennaId a, std::uint32_t n) {
  auto& row = p.by_hour[static_cast<std::size_t>(hour)];
  auto it = std::lower_bound(row.begin(), row.end(), a, [](const auto& e, AntennaId x) { return e.first < x; });
  if (it == row.end() || it->first != a) it = row.insert(it, {a, 0});
  it->second += n;
  p.totals[static_cast<std::size_t>(hour)] += n;
}

}  // namespace

const ProfileStore::UserProfile* ProfileStore::find(UserId u) const {
  return u.value < users_.size() ? &users_[u.value] : nullptr;
}

std::uint32_t ProfileStore::count(UserId u, int hour, AntennaId a) const {
  const auto* p = find(u);
  if (!p || hour < 0 || hour > 23) return 0;
  const auto& row = p->by_hour[static_cast<std::size_t>(hour)];
  const auto it = std::lower_bound(row.begin(), row.end(), a, [](const auto& e, AntennaId x) { return e.first < x; });
  return (it != row.end() && it->first == a) ? it->second : 0;
}

std::uint32_t ProfileStore::total(UserId u, int hour) const {
  const auto* p = find(u);
  return (p && hour >= 0 && hour < 24) ? p->totals[static_cast<std::size_t>(hour)] : 0;
}

ProfileStore build_profiles(std::span<const Call> calls, const TimeGrid& grid, std::size_t n_users) {
  std::vector<ProfileStore::UserProfile> users(n_users);
  for (const auto& c : calls) {
    if (c.user.value >= users.size()) users.resize(c.user.value + 1);
    const auto [first, last] = grid.index_range(c.at);
    for (GridIndex t = first; t <= last; ++t) users[c.user.value].visits.emplace_back(t, c.antenna);
  }
  for (auto& u : users) {
    std::sort(u.visits.begin(), u.visits.end());
    for (std::size_t i = 0; i < u.visits.size();) {
      std::size_t j = i;
      while (j < u.visits.size() && u.visits[j] == u.visits[i]) ++j;
      add_count(u, grid.hour_of_day(u.visits[i].first), u.visits[i].second, static_cast<std::uint32_t>(j - i));
      i = j;
    }
  }
  return ProfileStore(grid, std::move(users));
}

std::vector<double> profile_vector(const ProfileStore& store, UserId user, std::span<const ChainLink> chain,
                                   std::optional<std::pair<GridIndex, GridIndex>> holdout) {
  std::vector<double> w(chain.size(), 0.0);
  const auto* p = store.find(user);
  if (!p) return w;

  // Calls inside the held-out span, per hour and per (hour, antenna).
  std::array<std::uint32_t, 24> held_total{};
  std::vector<std::pair<int, AntennaId>> held;
  if (holdout && store.has_history()) {
    const auto lo = std::lower_bound(p->visits.begin(), p->visits.end(), std::pair{holdout->first, AntennaId{0}});
    for (auto it = lo; it != p->visits.end() && it->first <= holdout->second; ++it) {
      const int h = store.grid().hour_of_day(it->first);
      ++held_total[static_cast<std::size_t>(h)];
      held.emplace_back(h, it->second);
    }
  }

  for (std::size_t k = 0; k < chain.size(); ++k) {
    const int h = store.grid().hour_of_day(chain[k].t);
    const auto held_here = static_cast<std::uint32_t>(std::count(held.begin(), held.end(), std::pair{h, chain[k].antenna}));
    const std::uint32_t denom = store.total(user, h) - held_total[static_cast<std::size_t>(h)];
    if (denom == 0) continue;
    w[k] = static_cast<double>(store.count(user, h, chain[k].antenna) - held_here) / static_cast<double>(denom);
  }
  return w;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Classification classify_unusual(const Crowd& crowd, const ProfileStore& store, const Params& params) {
  Classification out;
  const auto holdout = params.holdout_crowd_span ? std::optional{std::pair{crowd.start, crowd.end}} : std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i < crowd.committed.size(); ++i) {
    UserSimilarity s;
    s.user = crowd.committed[i];
    s.w_c = crowd.existence[i];
    s.w_m = profile_vector(store, s.user, crowd.chain, holdout);
    s.cosine = cosine(s.w_c, s.w_m);
    sum += s.cosine;
    out.report.users.push_back(std::move(s));
  }
  out.report.mean = crowd.committed.empty() ? 0.0 : sum / static_cast<double>(crowd.committed.size());
  out.unusual = out.report.mean < params.similarity;
  return out;
}

void save_profiles(std::ostream& out, const ProfileStore& store, const UserDictionary& users,
                   const AntennaRegistry& registry) {
  nlohmann::ordered_json j;
  j["format"] = "crowdlens-profiles";
  j["version"] = kProfileFormatVersion;
  j["grid"] = {{"origin", store.grid().origin}, {"step", store.grid().step},
               {"half_window", store.grid().half_window}, {"n_steps", store.grid().n_steps}};
  auto& counts = j["counts"] = nlohmann::ordered_json::object();
  for (std::uint32_t u = 0; u < store.n_users(); ++u) {
    const auto* p = store.find(UserId{u});
    for (int h = 0; h < 24; ++h)
      for (const auto& [a, n] : p->by_hour[static_cast<std::size_t>(h)])
        counts[users.name(UserId{u}) + "/" + std::to_string(h) + "/" + registry.name(a)] = n;
  }
  out << j.dump() << '\n';
}

ProfileStore load_profiles(std::istream& in, UserDictionary& users, const AntennaRegistry& registry) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("profile store is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "crowdlens-profiles") throw Error("not a profile store");
  if (j.value("version", 0) != kProfileFormatVersion) throw Error("unsupported profile store version");
  TimeGrid grid;
  const auto& g = j.at("grid");
  grid.origin = g.at("origin").get<TimePoint>();
  grid.step = g.at("step").get<Seconds>();
  grid.half_window = g.at("half_window").get<Seconds>();
  grid.n_steps = g.at("n_steps").get<GridIndex>();

  std::vector<ProfileStore::UserProfile> profiles;
  for (const auto& [key, value] : j.at("counts").items()) {
    const auto s1 = key.find('/');
    const auto s2 = key.find('/', s1 == std::string::npos ? s1 : s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos) throw Error("malformed profile key '" + key + "'");
    const UserId u = users.intern(key.substr(0, s1));
    const int hour = std::stoi(key.substr(s1 + 1, s2 - s1 - 1));
    const auto a = registry.find(key.substr(s2 + 1));
    if (!a || hour < 0 || hour > 23) throw Error("profile key '" + key + "' is out of range");
    if (u.value >= profiles.size()) profiles.resize(u.value + 1);
    add_count(profiles[u.value], hour, *a, value.get<std::uint32_t>());
  }
  if (profiles.size() < users.size()) profiles.resize(users.size());
  ProfileStore store(grid, std::move(profiles));
  store.set_has_history(false);
  return store;
}

}  // namespace crowdlens
