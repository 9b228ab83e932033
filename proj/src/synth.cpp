#include "crowdlens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace crowdlens {
namespace {

// Distribution helpers on top of the engine, so the byte stream does not
// depend on the standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool chance(double p) { return uniform() < p; }
  long between(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::size_t>(hi - lo + 1))); }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

private:
  std::mt19937_64 engine_;
};

enum class Role { Residential, Work, Venue };

struct SynthUser {
  std::size_t home = 0;
  std::size_t work = 0;
  double activity = 1.0;
};

struct SynthCall {
  TimePoint at;
  std::uint32_t user;
  std::uint32_t antenna;
  friend bool operator<(const SynthCall& a, const SynthCall& b) {
    return std::tie(a.at, a.user, a.antenna) < std::tie(b.at, b.user, b.antenna);
  }
};

constexpr int kJitterSeconds = 1200;

std::string user_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "U%05zu", i);
  return buf;
}

std::string antenna_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "A%03zu", i);
  return buf;
}

}  // namespace

double routine_call_probability(int hour) {
  if (hour < 6) return 0.04;
  if (hour == 6) return 0.3;
  if (hour <= 21) return 0.7;
  if (hour == 22) return 0.4;
  return 0.15;
}

SynthSummary generate(const SynthConfig& config, std::ostream& calls_out, std::ostream& antennas_out,
                      std::ostream& truth_out) {
  if (config.n_antennas < 4) throw Error("synthetic city needs at least 4 antennas");
  if (config.n_users == 0 || config.n_days == 0) throw Error("synthetic city needs users and days");
  Rng rng(config.seed);

  // Antennas on a jittered lattice, roles assigned at random.
  const std::size_t n_ant = config.n_antennas;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_ant))));
  const std::size_t rows = (n_ant + cols - 1) / cols;
  std::vector<GeoPoint> positions(n_ant);
  for (std::size_t i = 0; i < n_ant; ++i) {
    const double fx = (static_cast<double>(i % cols) + 0.25 + 0.5 * rng.uniform()) / static_cast<double>(cols);
    const double fy = (static_cast<double>(i / cols) + 0.25 + 0.5 * rng.uniform()) / static_cast<double>(rows);
    positions[i] = {config.lon_min + fx * (config.lon_max - config.lon_min),
                    config.lat_min + fy * (config.lat_max - config.lat_min)};
  }
  std::vector<std::size_t> order(n_ant);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t n_venue = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(n_ant / 16.0)));
  const std::size_t n_work = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(n_ant * 0.25)));
  std::vector<Role> role(n_ant, Role::Residential);
  std::vector<std::size_t> venues, works, residences, ordinary;
  for (std::size_t k = 0; k < n_ant; ++k) {
    const std::size_t a = order[k];
    if (k < n_venue) {
      role[a] = Role::Venue;
      venues.push_back(a);
    } else if (k < n_venue + n_work) {
      role[a] = Role::Work;
      works.push_back(a);
    } else {
      residences.push_back(a);
    }
  }
  if (residences.empty()) throw Error("synthetic city has no residential antennas");
  for (std::size_t a = 0; a < n_ant; ++a)
    if (role[a] != Role::Venue) ordinary.push_back(a);

  std::vector<SynthUser> users(config.n_users);
  for (auto& u : users) {
    u.home = residences[rng.below(residences.size())];
    u.work = rng.chance(config.worker_share) ? works[rng.below(works.size())] : u.home;
    u.activity = 0.85 + 0.3 * rng.uniform();
  }

  // Routine calls: home 19:00-08:00, work 09:00-18:00, occasional excursions.
  const auto n_slots = static_cast<GridIndex>(config.n_days * 24);
  std::vector<std::vector<SynthCall>> per_user(users.size());
  for (std::size_t ui = 0; ui < users.size(); ++ui) {
    const auto& u = users[ui];
    for (GridIndex slot = 0; slot < n_slots; ++slot) {
      const int hour = slot % 24;
      const double p = std::min(0.95, routine_call_probability(hour) * u.activity);
      if (!rng.chance(p)) continue;
      std::size_t where = (hour >= 9 && hour <= 18) ? u.work : u.home;
      if (hour >= 10 && hour <= 21 && rng.chance(config.excursion_probability)) where = ordinary[rng.below(ordinary.size())];
      const TimePoint at = config.origin + static_cast<TimePoint>(slot) * 3600 + rng.between(-kJitterSeconds, kJitterSeconds);
      per_user[ui].push_back({at, static_cast<std::uint32_t>(ui), static_cast<std::uint32_t>(where)});
    }
  }

  // Planted events.
  std::vector<PlantedEvent> events = config.events;
  {
    std::vector<std::size_t> days;
    for (std::size_t d = 1; d + 1 < config.n_days; ++d) days.push_back(d);
    rng.shuffle(days);
    if (config.n_random_events > days.size()) throw Error("too many random events for the number of days");
    for (std::size_t i = 0; i < config.n_random_events; ++i) {
      PlantedEvent e;
      const int start_hour = static_cast<int>(rng.between(11, 15));
      std::vector<std::size_t> route = venues;
      rng.shuffle(route);
      for (int h = 0; h < config.event_hours; ++h) {
        const auto slot = static_cast<GridIndex>(days[i] * 24 + static_cast<std::size_t>(start_hour + h));
        e.chain.emplace_back(slot, antenna_name(route[static_cast<std::size_t>(h / 2) % route.size()]));
      }
      events.push_back(std::move(e));
    }
  }

  std::set<std::size_t> taken;
  nlohmann::ordered_json truth;
  truth["events"] = nlohmann::ordered_json::array();
  for (std::size_t ei = 0; ei < events.size(); ++ei) {
    const auto& e = events[ei];
    if (e.chain.empty()) throw Error("planted event has an empty chain");
    std::vector<std::pair<GridIndex, std::size_t>> chain;
    for (const auto& [slot, name] : e.chain) {
      std::size_t a = n_ant;
      for (std::size_t k = 0; k < n_ant; ++k)
        if (antenna_name(k) == name) a = k;
      if (a == n_ant) throw Error("planted event references unknown antenna '" + name + "'");
      if (slot < 0 || slot >= n_slots) throw Error("planted event lies outside the synthetic period");
      chain.emplace_back(slot, a);
    }
    std::set<std::size_t> chain_antennas;
    for (const auto& [slot, a] : chain) chain_antennas.insert(a);

    // Worst case one event call per chain slot; the profile share at that hour
    // must stay within the leak bound.
    const auto eligible = [&](std::size_t ui) {
      const auto& u = users[ui];
      if (taken.contains(ui) || chain_antennas.contains(u.home) || chain_antennas.contains(u.work)) return false;
      for (const auto& [slot, a] : chain) {
        const int hour = slot % 24;
        std::size_t at_hour = 0, at_antenna = 0;
        for (const auto& c : per_user[ui]) {
          const auto cs = static_cast<GridIndex>((c.at - config.origin + 1800) / 3600);
          if (cs % 24 != hour || cs / 24 == slot / 24) continue;
          ++at_hour;
          if (c.antenna == a) ++at_antenna;
        }
        if (static_cast<double>(at_antenna + 1) > config.leak_bound * static_cast<double>(at_hour + 1)) return false;
      }
      return true;
    };

    std::vector<std::size_t> participants;
    if (!e.participants.empty()) {
      for (const auto& name : e.participants) {
        std::size_t ui = users.size();
        for (std::size_t k = 0; k < users.size(); ++k)
          if (user_name(k) == name) ui = k;
        if (ui == users.size()) throw Error("planted event references unknown user '" + name + "'");
        participants.push_back(ui);
      }
    } else {
      std::vector<std::size_t> pool(users.size());
      std::iota(pool.begin(), pool.end(), 0);
      rng.shuffle(pool);
      for (const auto ui : pool) {
        if (participants.size() == e.n_participants) break;
        if (eligible(ui)) participants.push_back(ui);
      }
      if (participants.size() < e.n_participants) throw Error("not enough eligible participants for a planted event");
    }

    for (const auto ui : participants) {
      taken.insert(ui);
      auto& calls = per_user[ui];
      std::erase_if(calls, [&](const SynthCall& c) {
        const auto cs = static_cast<GridIndex>((c.at - config.origin + 1800) / 3600);
        return std::any_of(chain.begin(), chain.end(), [&](const auto& link) { return link.first == cs; });
      });
      for (const auto& [slot, a] : chain) {
        if (!rng.chance(e.call_probability)) continue;
        const TimePoint at = config.origin + static_cast<TimePoint>(slot) * 3600 + rng.between(-kJitterSeconds, kJitterSeconds);
        calls.push_back({at, static_cast<std::uint32_t>(ui), static_cast<std::uint32_t>(a)});
      }
    }

    nlohmann::ordered_json je;
    je["event_id"] = "E" + std::to_string(ei + 1);
    je["start"] = format_iso8601(config.origin + static_cast<TimePoint>(chain.front().first) * 3600);
    je["end"] = format_iso8601(config.origin + static_cast<TimePoint>(chain.back().first) * 3600);
    auto& ids = je["antenna_ids"] = nlohmann::ordered_json::array();
    std::vector<std::size_t> seen;
    for (const auto& [slot, a] : chain)
      if (std::find(seen.begin(), seen.end(), a) == seen.end()) {
        seen.push_back(a);
        ids.push_back(antenna_name(a));
      }
    std::vector<std::string> names;
    for (const auto ui : participants) names.push_back(user_name(ui));
    std::sort(names.begin(), names.end());
    je["participants"] = names;
    truth["events"].push_back(std::move(je));
  }

  std::vector<SynthCall> all;
  for (auto& v : per_user) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end());
  std::size_t n_events = events.size();
  if (config.max_rows > 0 && all.size() > config.max_rows) {
    all.resize(config.max_rows);
    // Events not fully covered by the kept rows leave the ground truth.
    const TimePoint last = all.back().at;
    auto kept = nlohmann::ordered_json::array();
    for (auto& e : truth["events"])
      if (parse_iso8601(e["end"].get<std::string>()) <= last) kept.push_back(std::move(e));
    n_events = kept.size();
    truth["events"] = std::move(kept);
  }

  std::vector<std::string> user_names(users.size()), antenna_names(n_ant);
  for (std::size_t i = 0; i < users.size(); ++i) user_names[i] = user_name(i);
  for (std::size_t i = 0; i < n_ant; ++i) antenna_names[i] = antenna_name(i);

  calls_out << "user_id,timestamp,antenna_id\n";
  std::string line;
  for (const auto& c : all) {
    line.clear();
    line += user_names[c.user];
    line += ',';
    line += format_iso8601(c.at);
    line += ',';
    line += antenna_names[c.antenna];
    line += '\n';
    calls_out << line;
  }

  antennas_out << "antenna_id,longitude,latitude\n";
  char buf[96];
  for (std::size_t i = 0; i < n_ant; ++i) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", antenna_names[i].c_str(), positions[i].lon, positions[i].lat);
    antennas_out << buf;
  }
  truth_out << truth.dump(2) << '\n';

  return SynthSummary{all.size(), users.size(), n_ant, n_events};
}

SynthOutput generate(const SynthConfig& config) {
  std::ostringstream calls, antennas, truth;
  SynthOutput out;
  out.summary = generate(config, calls, antennas, truth);
  out.calls_csv = std::move(calls).str();
  out.antennas_csv = std::move(antennas).str();
  out.ground_truth_json = std::move(truth).str();
  return out;
}

SynthSummary generate_to_directory(const SynthConfig& config, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ofstream calls(base / "calls.csv"), antennas(base / "antennas.csv"), truth(base / "ground_truth.json");
  if (!calls || !antennas || !truth) throw Error("cannot write synthetic data into '" + dir + "'");
  return generate(config, calls, antennas, truth);
}

}  // namespace crowdlens
