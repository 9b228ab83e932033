#pragma once

#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crowdlens/model.hpp"

namespace crowdlens {

class AntennaRegistry {
public:
  AntennaRegistry() = default;
  /// Sorts by id and rejects duplicates and out-of-range positions.
  explicit AntennaRegistry(std::vector<Antenna> antennas);

  [[nodiscard]] std::size_t size() const { return antennas_.size(); }
  [[nodiscard]] bool empty() const { return antennas_.empty(); }
  [[nodiscard]] const Antenna& at(AntennaId id) const { return antennas_.at(id.value); }
  [[nodiscard]] const std::string& name(AntennaId id) const { return antennas_.at(id.value).id; }
  [[nodiscard]] GeoPoint position(AntennaId id) const { return antennas_.at(id.value).position; }
  [[nodiscard]] std::optional<AntennaId> find(std::string_view name) const;
  [[nodiscard]] std::span<const Antenna> all() const { return antennas_; }

private:
  std::vector<Antenna> antennas_;
  std::unordered_map<std::string, AntennaId> by_name_;
};

/// Interns external user ids in order of first appearance.
class UserDictionary {
public:
  UserId intern(std::string_view name);
  [[nodiscard]] std::optional<UserId> find(std::string_view name) const;
  [[nodiscard]] const std::string& name(UserId id) const { return names_.at(id.value); }
  [[nodiscard]] std::size_t size() const { return names_.size(); }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, UserId> by_name_;
};

struct Observation {
  AntennaId antenna;
  UserId user;
  TimePoint at = 0;
  friend constexpr auto operator<=>(const Observation&, const Observation&) = default;
};

/// Per grid index, every (call, index) pair admitted by the window rule.
/// Observations at one index are ordered by (user, antenna, time).
class CallIndex {
public:
  CallIndex() = default;
  explicit CallIndex(TimeGrid grid) : grid_(grid), slots_(static_cast<std::size_t>(grid.n_steps)) {}

  void add(const Call& call);
  /// Sorts every slot; must be called once after the last add.
  void finalize();

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] std::span<const Observation> at(GridIndex t) const { return slots_.at(static_cast<std::size_t>(t)); }
  [[nodiscard]] std::size_t total() const;
  friend bool operator==(const CallIndex&, const CallIndex&) = default;

private:
  TimeGrid grid_;
  std::vector<std::vector<Observation>> slots_;
};

struct IngestReport {
  std::size_t admitted = 0;
  std::size_t unknown_antenna = 0;
  std::size_t out_of_range = 0;
  std::size_t malformed = 0;
};

std::string to_json(const IngestReport& report);

AntennaRegistry load_antennas(std::istream& source);

/// Raw parse of a call CSV (canonical or split date/time header). Rows naming
/// unknown antennas and malformed rows are counted and skipped.
struct ParsedCalls {
  std::vector<Call> calls;
  UserDictionary users;
  IngestReport report;
};
ParsedCalls parse_calls(std::istream& source, const AntennaRegistry& registry);

struct LoadedCalls {
  std::vector<Call> calls;  // admitted only
  UserDictionary users;
  CallIndex index;
  IngestReport report;
};

/// Parses and indexes calls against a fixed grid; calls outside every window
/// are counted as out_of_range.
LoadedCalls load_calls(std::istream& source, const AntennaRegistry& registry, const TimeGrid& grid);
/// Same, with the grid inferred from the call times.
LoadedCalls load_calls(std::istream& source, const AntennaRegistry& registry, Seconds step = 3600,
                       Seconds half_window = 1800);

/// Indexes already-parsed calls; returns those admitted.
std::vector<Call> index_calls(std::span<const Call> calls, CallIndex& index, IngestReport& report);

void write_calls_csv(std::ostream& out, std::span<const Call> calls, const UserDictionary& users,
                     const AntennaRegistry& registry);
void write_antennas_csv(std::ostream& out, const AntennaRegistry& registry);

/// Fraction of consecutive same-user call pairs per whole-hour gap.
std::map<long, double> inter_call_gap_histogram(std::span<const Call> calls);

/// A loaded dataset: registry, users, admitted calls and their index.
struct Dataset {
  AntennaRegistry antennas;
  LoadedCalls calls;
};

Dataset load_dataset(const std::string& calls_path, const std::string& antennas_path, Seconds half_window = 1800);

}  // namespace crowdlens
