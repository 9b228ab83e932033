#include "crowdlens/report.hpp"

#include <algorithm>
#include <sstream>

namespace crowdlens {
namespace {

using ojson = nlohmann::ordered_json;

ojson optional_series(const std::vector<std::optional<double>>& v) {
  ojson out = ojson::array();
  for (const auto& x : v) out.push_back(x ? ojson(*x) : ojson(nullptr));
  return out;
}

ojson hull_to_json(const std::vector<GeoPoint>& hull) {
  ojson out = ojson::array();
  for (const auto& p : hull) out.push_back({p.lon, p.lat});
  return out;
}

double mean_latitude(const AntennaRegistry& registry) {
  double lat = 0.0;
  for (const auto& a : registry.all()) lat += a.position.lat;
  return registry.empty() ? 0.0 : lat / static_cast<double>(registry.size());
}

std::vector<std::string> user_names(const std::vector<UserId>& ids, const UserDictionary& users) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const auto u : ids) out.push_back(users.name(u));
  std::sort(out.begin(), out.end());
  return out;
}

ojson crowd_to_json(const Crowd& c, const RunArtifacts& run, const Dataset& d, std::optional<double> similarity) {
  ojson j;
  j["start"] = c.start;
  j["end"] = c.end;
  j["start_time"] = format_iso8601(run.grid.grid_time(c.start));
  j["end_time"] = format_iso8601(run.grid.grid_time(c.end));
  j["lifetime"] = c.lifetime;
  j["distinct_antennas"] = c.distinct_antennas;
  auto& chain = j["chain"] = ojson::array();
  for (const auto& l : c.chain) {
    const auto pos = run.clusters.find(l.t, l.antenna);
    std::vector<std::string> observed;
    if (pos >= 0) observed = user_names(run.clusters.at(l.t, static_cast<std::size_t>(pos)).members, d.calls.users);
    chain.push_back({{"t", l.t}, {"antenna_id", d.antennas.name(l.antenna)}, {"observed", observed}});
  }
  j["committed"] = user_names(c.committed, d.calls.users);
  if (similarity) j["similarity"] = *similarity;
  return j;
}

}  // namespace

PoiTable load_pois(std::istream& in, const AntennaRegistry& registry) {
  PoiTable out;
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const auto a = registry.find(line.substr(0, comma));
    if (!a) continue;
    out[*a].push_back(line.substr(comma + 1));
  }
  return out;
}

ojson params_to_json(const Params& p) {
  ojson j;
  j["epsilon_n"] = p.scale;
  j["epsilon_lt"] = p.lifetime;
  j["epsilon_ci"] = p.commitment;
  j["epsilon_p"] = p.commitment_probability;
  j["epsilon_si"] = p.similarity;
  j["min_locations"] = p.min_locations;
  j["window_minutes"] = p.half_window / 60;
  j["holdout_crowd_span"] = p.holdout_crowd_span;
  return j;
}

Params apply_overrides(const nlohmann::json& o, Params p) {
  if (o.is_null()) return p;
  if (!o.is_object()) throw Error("parameter overrides must be a JSON object");
  const auto integer = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer()) throw Error("'" + key + "' must be an integer");
    return v.get<long long>();
  };
  const auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw Error("'" + key + "' must be a number");
    return v.get<double>();
  };
  for (const auto& [key, v] : o.items()) {
    if (key == "epsilon_n") p.scale = static_cast<int>(integer(v, key));
    else if (key == "epsilon_lt") p.lifetime = static_cast<int>(integer(v, key));
    else if (key == "epsilon_ci") p.commitment = static_cast<int>(integer(v, key));
    else if (key == "epsilon_p") p.commitment_probability = number(v, key);
    else if (key == "epsilon_si") p.similarity = number(v, key);
    else if (key == "min_locations") p.min_locations = static_cast<int>(integer(v, key));
    else if (key == "window_minutes") p.half_window = integer(v, key) * 60;
    else if (key == "holdout_crowd_span") {
      if (!v.is_boolean()) throw Error("'holdout_crowd_span' must be a boolean");
      p.holdout_crowd_span = v.get<bool>();
    } else {
      throw Error("unknown parameter '" + key + "'");
    }
  }
  return p;
}

ojson events_to_json(const RunArtifacts& run, const Dataset& d, const PoiTable* pois) {
  const double ref_lat = mean_latitude(d.antennas);
  ojson out = ojson::array();
  for (std::size_t ei = 0; ei < run.events.size(); ++ei) {
    const auto& e = run.events[ei];
    ojson j;
    j["event_id"] = "E" + std::to_string(ei + 1);
    j["start"] = e.start;
    j["end"] = e.end;
    j["start_time"] = format_iso8601(run.grid.grid_time(e.start));
    j["end_time"] = format_iso8601(run.grid.grid_time(e.end));
    j["n_crowds"] = e.crowds.size();
    j["participants"] = user_names(e.participants, d.calls.users);
    j["hull"] = hull_to_json(e.hull);

    // Pop-up attributes: the event's clusters at each timestamp of its span.
    auto& clusters = j["clusters"] = ojson::array();
    for (GridIndex t = e.start; t <= e.end; ++t) {
      std::vector<AntennaId> antennas;
      for (const auto ci : e.crowds)
        for (const auto& l : run.unusual[ci].chain)
          if (l.t == t) antennas.push_back(l.antenna);
      std::sort(antennas.begin(), antennas.end());
      antennas.erase(std::unique(antennas.begin(), antennas.end()), antennas.end());
      if (antennas.empty()) continue;
      std::vector<UserId> members;
      std::vector<GeoPoint> pts;
      ojson ids = ojson::array(), poi_names = ojson::array();
      for (const auto a : antennas) {
        const auto pos = run.clusters.find(t, a);
        if (pos >= 0) {
          const auto& m = run.clusters.at(t, static_cast<std::size_t>(pos)).members;
          members.insert(members.end(), m.begin(), m.end());
        }
        pts.push_back(d.antennas.position(a));
        ids.push_back(d.antennas.name(a));
        if (pois)
          if (const auto it = pois->find(a); it != pois->end())
            for (const auto& name : it->second) poi_names.push_back(name);
      }
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      const auto hull = convex_hull(pts);
      const double area = polygon_area_km2(hull, ref_lat);
      ojson c;
      c["t"] = t;
      c["timestamp"] = format_iso8601(run.grid.grid_time(t));
      c["antenna_ids"] = ids;
      c["n_users"] = members.size();
      c["hull"] = hull_to_json(hull);
      c["area_km2"] = area;
      c["density"] = area > 0.0 ? ojson(static_cast<double>(members.size()) / area) : ojson(nullptr);
      c["pois"] = poi_names;
      clusters.push_back(std::move(c));
    }

    auto& crowds = j["crowds"] = ojson::array();
    for (const auto ci : e.crowds) crowds.push_back(crowd_to_json(run.unusual[ci], run, d, run.unusual_similarity[ci]));
    out.push_back(std::move(j));
  }
  return out;
}

ojson crowds_to_json(const RunArtifacts& run, const Dataset& d) {
  ojson out = ojson::array();
  for (std::size_t i = 0; i < run.crowds.size(); ++i) {
    auto j = crowd_to_json(run.crowds[i], run, d, run.classifications[i].report.mean);
    j["unusual"] = run.classifications[i].unusual;
    out.push_back(std::move(j));
  }
  return out;
}

ojson timeseries_to_json(const TimeSeries& ts, const TimeGrid& grid) {
  ojson j;
  j["origin"] = format_iso8601(grid.origin);
  j["step_seconds"] = grid.step;
  j["n_steps"] = grid.n_steps;
  j["clusters"] = ts.clusters;
  j["candidate_crowds"] = ts.candidate_crowds;
  j["crowds"] = ts.crowds;
  j["unusual_crowds"] = ts.unusual_crowds;
  j["unusual_events"] = ts.unusual_events;
  j["active_users"] = ts.active_users;
  j["total_calls"] = ts.total_calls;
  return j;
}

std::string timeseries_to_csv(const TimeSeries& ts, const TimeGrid& grid) {
  std::ostringstream out;
  out << "t,timestamp,clusters,candidate_crowds,crowds,unusual_crowds,unusual_events,active_users,total_calls\n";
  for (std::size_t t = 0; t < ts.clusters.size(); ++t)
    out << t << ',' << format_iso8601(grid.grid_time(static_cast<GridIndex>(t))) << ',' << ts.clusters[t] << ','
        << ts.candidate_crowds[t] << ',' << ts.crowds[t] << ',' << ts.unusual_crowds[t] << ',' << ts.unusual_events[t]
        << ',' << ts.active_users[t] << ',' << ts.total_calls[t] << '\n';
  return out.str();
}

ojson analyst_to_json(const AnalystStats& s) {
  ojson j;
  j["cumulative"] = {{"values",
                      {{"clusters", s.cumulative.clusters},
                       {"candidate_crowds", s.cumulative.candidates},
                       {"crowds", s.cumulative.crowds},
                       {"unusual_crowds", s.cumulative.unusual_crowds},
                       {"unusual_events", s.cumulative.events}}},
                     {"thresholds", ojson::object()}};
  j["detection_per_timestamp"] = {{"series",
                                   {{"clusters", s.detected_clusters},
                                    {"crowds", s.detected_crowds},
                                    {"unusual_crowds", s.detected_unusual},
                                    {"unusual_events", s.detected_events}}},
                                  {"thresholds", ojson::object()}};
  ojson monitoring = ojson::object();
  if (!s.max_lifetime.empty()) {
    monitoring["max_lifetime"] = optional_series(s.max_lifetime);
    monitoring["min_lifetime"] = optional_series(s.min_lifetime);
    monitoring["max_committed"] = optional_series(s.max_committed);
    monitoring["min_committed"] = optional_series(s.min_committed);
    monitoring["max_users"] = optional_series(s.max_users);
    monitoring["min_users"] = optional_series(s.min_users);
    monitoring["max_similarity"] = optional_series(s.max_similarity);
    monitoring["min_similarity"] = optional_series(s.min_similarity);
  }
  j["event_monitoring"] = {{"series", monitoring},
                           {"thresholds",
                            {{"epsilon_lt", s.params.lifetime},
                             {"epsilon_ci", s.params.commitment},
                             {"epsilon_p", s.params.commitment_probability},
                             {"epsilon_si", s.params.similarity}}}};
  j["cluster_monitoring"] = {{"series",
                              {{"max_cluster_size", optional_series(s.max_cluster_size)},
                               {"min_radius_km", optional_series(s.min_radius_km)}}},
                             {"thresholds", {{"epsilon_n", s.params.scale}}}};
  return j;
}

ojson summary_to_json(const RunArtifacts& run) {
  ojson j;
  j["n_steps"] = run.grid.n_steps;
  j["clusters"] = run.clusters.total();
  j["crowds"] = run.crowds.size();
  j["unusual_crowds"] = run.unusual.size();
  j["unusual_events"] = run.events.size();
  j["params"] = params_to_json(run.params);
  return j;
}

}  // namespace crowdlens
