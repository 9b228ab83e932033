#include "crowdlens/eval.hpp"

#include <algorithm>

#include <json.hpp>

namespace crowdlens {
namespace {

std::vector<std::string> sorted_strings(const nlohmann::json& arr) {
  auto v = arr.get<std::vector<std::string>>();
  std::sort(v.begin(), v.end());
  return v;
}

nlohmann::json read_json(std::istream& in, const char* what) {
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string(what) + " is not valid JSON: " + e.what());
  }
}

void minmax_into(std::optional<double>& lo, std::optional<double>& hi, double v) {
  lo = lo ? std::min(*lo, v) : v;
  hi = hi ? std::max(*hi, v) : v;
}

}  // namespace

bool matches(const DetectedEvent& detected, const TruthEvent& truth) {
  if (std::min(detected.end, truth.end) < std::max(detected.start, truth.start)) return false;
  std::vector<std::string> common;
  std::set_intersection(detected.participants.begin(), detected.participants.end(), truth.participants.begin(),
                        truth.participants.end(), std::back_inserter(common));
  return 2 * common.size() >= truth.participants.size();
}

EvalResult eval_from_counts(std::size_t matched, std::size_t matched_detections, std::size_t detected, std::size_t truth) {
  if (matched > truth || matched_detections > detected) throw Error("matched counts exceed totals");
  EvalResult r{matched, matched_detections, detected, truth, std::nullopt, std::nullopt};
  if (detected > 0) r.precision = static_cast<double>(matched_detections) / static_cast<double>(detected);
  if (truth > 0) r.recall = static_cast<double>(matched) / static_cast<double>(truth);
  return r;
}

EvalResult score(std::span<const DetectedEvent> detected, std::span<const TruthEvent> truth) {
  std::vector<bool> truth_hit(truth.size(), false);
  std::size_t matched_detections = 0;
  for (const auto& d : detected) {
    bool any = false;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (matches(d, truth[i])) {
        truth_hit[i] = true;
        any = true;
      }
    if (any) ++matched_detections;
  }
  const auto matched = static_cast<std::size_t>(std::count(truth_hit.begin(), truth_hit.end(), true));
  return eval_from_counts(matched, matched_detections, detected.size(), truth.size());
}

std::vector<TruthEvent> parse_ground_truth(std::istream& in) {
  const auto j = read_json(in, "ground truth");
  std::vector<TruthEvent> out;
  try {
    for (const auto& e : j.at("events")) {
      TruthEvent t;
      t.event_id = e.at("event_id").get<std::string>();
      t.start = parse_iso8601(e.at("start").get<std::string>());
      t.end = parse_iso8601(e.at("end").get<std::string>());
      t.antenna_ids = e.value("antenna_ids", std::vector<std::string>{});
      t.participants = sorted_strings(e.at("participants"));
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed ground truth: ") + e.what());
  }
  return out;
}

std::vector<DetectedEvent> parse_detected_events(std::istream& in) {
  const auto j = read_json(in, "event file");
  std::vector<DetectedEvent> out;
  try {
    const auto& events = j.is_array() ? j : j.at("events");
    for (const auto& e : events) {
      DetectedEvent d;
      d.start = parse_iso8601(e.at("start_time").get<std::string>());
      d.end = parse_iso8601(e.at("end_time").get<std::string>());
      d.participants = sorted_strings(e.at("participants"));
      out.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed event file: ") + e.what());
  }
  return out;
}

std::vector<DetectedEvent> detected_events(const RunArtifacts& run, const UserDictionary& users) {
  std::vector<DetectedEvent> out;
  for (const auto& e : run.events) {
    DetectedEvent d{run.grid.grid_time(e.start), run.grid.grid_time(e.end), {}};
    for (const auto u : e.participants) d.participants.push_back(users.name(u));
    std::sort(d.participants.begin(), d.participants.end());
    out.push_back(std::move(d));
  }
  return out;
}

std::string to_json(const EvalResult& r) {
  nlohmann::ordered_json j;
  j["matched"] = r.matched;
  j["matched_detections"] = r.matched_detections;
  j["detected"] = r.detected;
  j["truth"] = r.truth;
  j["precision"] = r.precision ? nlohmann::ordered_json(*r.precision) : nlohmann::ordered_json(nullptr);
  j["recall"] = r.recall ? nlohmann::ordered_json(*r.recall) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

TimeSeries timeseries(const RunArtifacts& run) {
  const auto n = static_cast<std::size_t>(run.grid.n_steps);
  TimeSeries ts;
  ts.clusters.assign(n, 0);
  ts.candidate_crowds.assign(n, 0);
  ts.crowds.assign(n, 0);
  ts.unusual_crowds.assign(n, 0);
  ts.unusual_events.assign(n, 0);
  ts.active_users = run.active_users;
  ts.total_calls = run.total_calls;
  ts.active_users.resize(n, 0);
  ts.total_calls.resize(n, 0);
  for (std::size_t t = 0; t < n && t < static_cast<std::size_t>(run.clusters.n_steps()); ++t)
    ts.clusters[t] = run.clusters.at(static_cast<GridIndex>(t)).size();
  for (std::size_t t = 0; t < n && t < run.trace.per_t.size(); ++t) ts.candidate_crowds[t] = run.trace.per_t[t].candidates;
  const auto span_add = [n](std::vector<std::size_t>& series, GridIndex start, GridIndex end) {
    for (auto t = static_cast<std::size_t>(std::max(start, 0)); t <= static_cast<std::size_t>(end) && t < n; ++t) ++series[t];
  };
  for (const auto& c : run.crowds) span_add(ts.crowds, c.start, c.end);
  for (const auto& c : run.unusual) span_add(ts.unusual_crowds, c.start, c.end);
  for (const auto& e : run.events) span_add(ts.unusual_events, e.start, e.end);
  return ts;
}

AnalystStats analyst_stats(const RunArtifacts& run, const AntennaRegistry& registry) {
  const auto n = static_cast<std::size_t>(run.grid.n_steps);
  AnalystStats s;
  s.params = run.params;
  s.cumulative.clusters = run.clusters.total();
  for (const auto& c : run.trace.per_t) s.cumulative.candidates += c.candidates;
  s.cumulative.crowds = run.crowds.size();
  s.cumulative.unusual_crowds = run.unusual.size();
  s.cumulative.events = run.events.size();

  s.detected_clusters.assign(n, 0);
  s.detected_crowds.assign(n, 0);
  s.detected_unusual.assign(n, 0);
  s.detected_events.assign(n, 0);
  for (std::size_t t = 0; t < n && t < static_cast<std::size_t>(run.clusters.n_steps()); ++t)
    s.detected_clusters[t] = run.clusters.at(static_cast<GridIndex>(t)).size();
  for (const auto& c : run.crowds) ++s.detected_crowds.at(static_cast<std::size_t>(c.end));
  for (const auto& c : run.unusual) ++s.detected_unusual.at(static_cast<std::size_t>(c.end));
  for (const auto& e : run.events) ++s.detected_events.at(static_cast<std::size_t>(e.end));

  if (s.cumulative.candidates > 0) {
    for (auto* v : {&s.max_lifetime, &s.min_lifetime, &s.max_committed, &s.min_committed, &s.max_users, &s.min_users,
                    &s.max_similarity, &s.min_similarity})
      v->assign(n, std::nullopt);
    for (std::size_t t = 0; t < n && t < run.trace.per_t.size(); ++t) {
      const auto& c = run.trace.per_t[t];
      if (c.candidates == 0) continue;
      s.max_lifetime[t] = c.max_lifetime;
      s.min_lifetime[t] = c.min_lifetime;
      s.max_committed[t] = static_cast<double>(c.max_committed);
      s.min_committed[t] = static_cast<double>(c.min_committed);
      s.max_users[t] = static_cast<double>(c.max_users);
      s.min_users[t] = static_cast<double>(c.min_users);
    }
    for (std::size_t i = 0; i < run.crowds.size(); ++i) {
      const double sim = run.classifications.at(i).report.mean;
      for (auto t = static_cast<std::size_t>(run.crowds[i].start); t <= static_cast<std::size_t>(run.crowds[i].end) && t < n; ++t)
        minmax_into(s.min_similarity[t], s.max_similarity[t], sim);
    }
  }

  s.max_cluster_size.assign(n, std::nullopt);
  s.min_radius_km.assign(n, std::nullopt);
  for (std::size_t t = 0; t < n && t < static_cast<std::size_t>(run.clusters.n_steps()); ++t)
    for (const auto& c : run.clusters.at(static_cast<GridIndex>(t)))
      s.max_cluster_size[t] = std::max(s.max_cluster_size[t].value_or(0.0), static_cast<double>(c.size()));

  double mean_lat = 0.0;
  for (const auto& a : registry.all()) mean_lat += a.position.lat;
  if (!registry.empty()) mean_lat /= static_cast<double>(registry.size());
  for (const auto& crowd : run.crowds) {
    std::vector<GeoPoint> pts;
    for (const auto& l : crowd.chain) pts.push_back(registry.position(l.antenna));
    const double r = spatial_radius_km(pts, mean_lat);
    for (auto t = static_cast<std::size_t>(crowd.start); t <= static_cast<std::size_t>(crowd.end) && t < n; ++t)
      s.min_radius_km[t] = std::min(s.min_radius_km[t].value_or(r), r);
  }
  return s;
}

}  // namespace crowdlens
