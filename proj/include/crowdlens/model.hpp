#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crowdlens {

/// Raised for malformed input, broken preconditions and unusable configuration.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using GridIndex = std::int32_t;
/// Absolute time, UTC seconds since the epoch.
using TimePoint = std::int64_t;
using Seconds = std::int64_t;

struct UserId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(UserId, UserId) = default;
};

/// Antenna ids are interned in lexicographic order of their external names, so
/// comparing ids compares names.
struct AntennaId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(AntennaId, AntennaId) = default;
};

struct Call {
  UserId user;
  TimePoint at = 0;
  AntennaId antenna;
};

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
  friend constexpr bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Antenna {
  std::string id;
  GeoPoint position;
};

/// Regular grid of timestamps. A call at time tau belongs to every index t
/// with |tau - grid_time(t)| <= half_window.
struct TimeGrid {
  TimePoint origin = 0;
  Seconds step = 3600;
  Seconds half_window = 1800;
  GridIndex n_steps = 0;

  [[nodiscard]] TimePoint grid_time(GridIndex t) const { return origin + static_cast<TimePoint>(t) * step; }
  /// Hour of day (0..23, UTC) of the grid timestamp.
  [[nodiscard]] int hour_of_day(GridIndex t) const;
  /// Inclusive range [first, last] of indices whose window contains tau;
  /// first > last when there is none.
  [[nodiscard]] std::pair<GridIndex, GridIndex> index_range(TimePoint tau) const;
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

std::vector<GridIndex> grid_index_of(TimePoint tau, const TimeGrid& grid);

/// Smallest hour-aligned grid covering [min_time, max_time].
TimeGrid infer_grid(TimePoint min_time, TimePoint max_time, Seconds step = 3600, Seconds half_window = 1800);

struct Params {
  int scale = 20;                       // minimum users per cylindrical cluster
  int lifetime = 4;                     // minimum consecutive clusters in a crowd
  int commitment = 10;                  // minimum committed users
  double commitment_probability = 0.2;  // minimum existence probability of a committed user
  double similarity = 0.2;              // unusual iff mean cosine < similarity
  int min_locations = 2;                // distinct antennas a crowd must visit
  Seconds half_window = 1800;
  /// Drop the crowd's own time span from a user's profile before comparing.
  bool holdout_crowd_span = true;

  friend bool operator==(const Params&, const Params&) = default;
};

/// Every violated invariant, empty iff valid.
std::vector<std::string> validate_params(const Params& p);

/// Probability comparisons allow this much slack, so that 1/5 >= 0.2 holds.
inline constexpr double kProbabilityTolerance = 1e-9;

inline bool reaches(double probability, double threshold) {
  return probability >= threshold - kProbabilityTolerance;
}

struct Trajectory {
  UserId user;
  std::vector<std::pair<GridIndex, AntennaId>> points;

  /// Grid indices strictly increasing.
  [[nodiscard]] bool is_valid() const;
};

// ISO-8601 UTC helpers ("YYYY-MM-DDTHH:MM:SSZ").
std::string format_iso8601(TimePoint t);
/// Throws Error on anything other than the canonical form.
TimePoint parse_iso8601(std::string_view text);
/// Parses "YYYY-MM-DD" and "HH:MM:SS" separately; returns false on malformed input.
bool parse_date_time(std::string_view date, std::string_view time, TimePoint& out);

}  // namespace crowdlens

template <>
struct std::hash<crowdlens::UserId> {
  std::size_t operator()(crowdlens::UserId u) const noexcept { return std::hash<std::uint32_t>{}(u.value); }
};

template <>
struct std::hash<crowdlens::AntennaId> {
  std::size_t operator()(crowdlens::AntennaId a) const noexcept { return std::hash<std::uint32_t>{}(a.value); }
};
