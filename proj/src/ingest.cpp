#include "crowdlens/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace crowdlens {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

// Splits into at most `max_fields + 1` trimmed fields; the extra one flags overflow.
std::size_t split(std::string_view line, std::string_view* fields, std::size_t max_fields) {
  std::size_t n = 0;
  while (n <= max_fields) {
    const auto comma = line.find(',');
    if (n < max_fields) fields[n] = trim(line.substr(0, comma));
    ++n;
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return n;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  // std::from_chars for double is available in libstdc++ 11.
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string> header_columns(std::string_view line) {
  std::vector<std::string> cols;
  while (true) {
    const auto comma = line.find(',');
    cols.emplace_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  if (!cols.empty() && cols.front().starts_with("\xEF\xBB\xBF")) cols.front().erase(0, 3);
  return cols;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

AntennaRegistry::AntennaRegistry(std::vector<Antenna> antennas) : antennas_(std::move(antennas)) {
  std::sort(antennas_.begin(), antennas_.end(), [](const Antenna& a, const Antenna& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < antennas_.size(); ++i) {
    const auto& a = antennas_[i];
    if (i > 0 && antennas_[i - 1].id == a.id) throw Error("duplicate antenna id '" + a.id + "'");
    if (!(a.position.lon >= -180.0 && a.position.lon <= 180.0) || !(a.position.lat >= -90.0 && a.position.lat <= 90.0))
      throw Error("antenna '" + a.id + "' position out of range");
    by_name_.emplace(a.id, AntennaId{static_cast<std::uint32_t>(i)});
  }
}

std::optional<AntennaId> AntennaRegistry::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

UserId UserDictionary::intern(std::string_view name) {
  auto [it, inserted] = by_name_.try_emplace(std::string(name), UserId{static_cast<std::uint32_t>(names_.size())});
  if (inserted) names_.emplace_back(name);
  return it->second;
}

std::optional<UserId> UserDictionary::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

void CallIndex::add(const Call& call) {
  const auto [first, last] = grid_.index_range(call.at);
  for (GridIndex t = first; t <= last; ++t)
    slots_[static_cast<std::size_t>(t)].push_back(Observation{call.antenna, call.user, call.at});
}

void CallIndex::finalize() {
  for (auto& slot : slots_)
    std::sort(slot.begin(), slot.end(), [](const Observation& a, const Observation& b) {
      return std::tie(a.user, a.antenna, a.at) < std::tie(b.user, b.antenna, b.at);
    });
}

std::size_t CallIndex::total() const {
  return std::accumulate(slots_.begin(), slots_.end(), std::size_t{0},
                         [](std::size_t n, const auto& slot) { return n + slot.size(); });
}

std::string to_json(const IngestReport& r) {
  nlohmann::ordered_json j;
  j["admitted"] = r.admitted;
  j["unknown_antenna"] = r.unknown_antenna;
  j["out_of_range"] = r.out_of_range;
  j["malformed"] = r.malformed;
  return j.dump();
}

AntennaRegistry load_antennas(std::istream& source) {
  if (!source) throw Error("antenna source is not readable");
  std::string line;
  if (!std::getline(source, line)) throw Error("no antennas");
  const auto cols = header_columns(line);
  const auto column = [&](const char* name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw Error(std::string("antenna header lacks column '") + name + "'");
    return static_cast<std::size_t>(it - cols.begin());
  };
  const std::size_t c_id = column("antenna_id"), c_lon = column("longitude"), c_lat = column("latitude");

  std::vector<Antenna> antennas;
  std::size_t line_no = 1;
  std::string_view fields[8];
  while (std::getline(source, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const std::size_t n = split(line, fields, std::size(fields) - 1);
    Antenna a;
    if (n != cols.size() || fields[c_id].empty() || !parse_double(fields[c_lon], a.position.lon) ||
        !parse_double(fields[c_lat], a.position.lat))
      throw Error("malformed antenna row at line " + std::to_string(line_no));
    a.id = std::string(fields[c_id]);
    if (!(a.position.lon >= -180.0 && a.position.lon <= 180.0) || !(a.position.lat >= -90.0 && a.position.lat <= 90.0))
      throw Error("antenna position out of range at line " + std::to_string(line_no));
    antennas.push_back(std::move(a));
  }
  if (antennas.empty()) throw Error("no antennas");
  return AntennaRegistry(std::move(antennas));
}

ParsedCalls parse_calls(std::istream& source, const AntennaRegistry& registry) {
  if (!source) throw Error("call source is not readable");
  if (registry.empty()) throw Error("antenna registry is empty");
  ParsedCalls out;
  std::string line;
  if (!std::getline(source, line)) throw Error("call source is empty");
  const auto cols = header_columns(line);
  const auto index_of = [&](const char* name) -> std::ptrdiff_t {
    const auto it = std::find(cols.begin(), cols.end(), name);
    return it == cols.end() ? -1 : it - cols.begin();
  };
  const auto c_user = index_of("user_id"), c_antenna = index_of("antenna_id"), c_ts = index_of("timestamp"),
             c_date = index_of("date"), c_time = index_of("time");
  const bool split_form = c_ts < 0;
  if (c_user < 0 || c_antenna < 0 || (split_form && (c_date < 0 || c_time < 0)))
    throw Error("unrecognised call header '" + line + "'");

  std::string_view fields[8];
  while (std::getline(source, line)) {
    if (is_blank(line)) continue;
    const std::size_t n = split(line, fields, std::size(fields) - 1);
    TimePoint at = 0;
    bool ok = n == cols.size() && !fields[c_user].empty();
    if (ok) {
      if (split_form) {
        ok = parse_date_time(fields[c_date], fields[c_time], at);
      } else {
        const auto ts = fields[c_ts];
        ok = ts.size() == 20 && ts[10] == 'T' && ts[19] == 'Z' && parse_date_time(ts.substr(0, 10), ts.substr(11, 8), at);
      }
    }
    if (!ok) {
      ++out.report.malformed;
      continue;
    }
    const auto antenna = registry.find(fields[c_antenna]);
    if (!antenna) {
      ++out.report.unknown_antenna;
      continue;
    }
    out.calls.push_back(Call{out.users.intern(fields[c_user]), at, *antenna});
  }
  if (source.bad()) throw Error("error while reading call source");
  return out;
}

std::vector<Call> index_calls(std::span<const Call> calls, CallIndex& index, IngestReport& report) {
  std::vector<Call> admitted;
  admitted.reserve(calls.size());
  for (const auto& c : calls) {
    const auto [first, last] = index.grid().index_range(c.at);
    if (first > last) {
      ++report.out_of_range;
      continue;
    }
    index.add(c);
    admitted.push_back(c);
  }
  index.finalize();
  report.admitted = admitted.size();
  return admitted;
}

LoadedCalls load_calls(std::istream& source, const AntennaRegistry& registry, const TimeGrid& grid) {
  auto parsed = parse_calls(source, registry);
  LoadedCalls out{{}, std::move(parsed.users), CallIndex(grid), parsed.report};
  out.calls = index_calls(parsed.calls, out.index, out.report);
  return out;
}

LoadedCalls load_calls(std::istream& source, const AntennaRegistry& registry, Seconds step, Seconds half_window) {
  auto parsed = parse_calls(source, registry);
  TimeGrid grid;
  grid.step = step;
  grid.half_window = half_window;
  if (!parsed.calls.empty()) {
    const auto [lo, hi] = std::minmax_element(parsed.calls.begin(), parsed.calls.end(),
                                              [](const Call& a, const Call& b) { return a.at < b.at; });
    grid = infer_grid(lo->at, hi->at, step, half_window);
  }
  LoadedCalls out{{}, std::move(parsed.users), CallIndex(grid), parsed.report};
  out.calls = index_calls(parsed.calls, out.index, out.report);
  return out;
}

void write_calls_csv(std::ostream& out, std::span<const Call> calls, const UserDictionary& users,
                     const AntennaRegistry& registry) {
  out << "user_id,timestamp,antenna_id\n";
  for (const auto& c : calls) out << users.name(c.user) << ',' << format_iso8601(c.at) << ',' << registry.name(c.antenna) << '\n';
}

void write_antennas_csv(std::ostream& out, const AntennaRegistry& registry) {
  out << "antenna_id,longitude,latitude\n";
  char buf[64];
  for (const auto& a : registry.all()) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", a.position.lon, a.position.lat);
    out << a.id << ',' << buf << '\n';
  }
}

std::map<long, double> inter_call_gap_histogram(std::span<const Call> calls) {
  std::vector<std::pair<UserId, TimePoint>> by_user;
  by_user.reserve(calls.size());
  for (const auto& c : calls) by_user.emplace_back(c.user, c.at);
  std::sort(by_user.begin(), by_user.end());
  std::map<long, std::size_t> counts;
  std::size_t pairs = 0;
  for (std::size_t i = 1; i < by_user.size(); ++i) {
    if (by_user[i].first != by_user[i - 1].first) continue;
    const double hours = static_cast<double>(by_user[i].second - by_user[i - 1].second) / 3600.0;
    ++counts[std::lround(hours)];
    ++pairs;
  }
  std::map<long, double> out;
  for (const auto& [gap, n] : counts) out[gap] = static_cast<double>(n) / static_cast<double>(pairs);
  return out;
}

Dataset load_dataset(const std::string& calls_path, const std::string& antennas_path, Seconds half_window) {
  std::ifstream antennas(antennas_path);
  if (!antennas) throw Error("cannot open antenna file '" + antennas_path + "'");
  Dataset d{load_antennas(antennas), {}};
  std::ifstream calls(calls_path);
  if (!calls) throw Error("cannot open call file '" + calls_path + "'");
  d.calls = load_calls(calls, d.antennas, 3600, half_window);
  return d;
}

}  // namespace crowdlens
