#pragma once

#include <span>
#include <vector>

#include "crowdlens/crowd_miner.hpp"
#include "crowdlens/ingest.hpp"

namespace crowdlens {

struct UnusualEvent {
  std::vector<std::size_t> crowds;  // positions in the input list, ascending
  GridIndex start = 0;
  GridIndex end = 0;
  std::vector<UserId> participants;  // union of committed sets, sorted
  std::vector<GeoPoint> hull;        // counterclockwise

  friend bool operator==(const UnusualEvent&, const UnusualEvent&) = default;
};

/// Spans intersect and the committed sets share at least half of their union.
bool are_connected(const Crowd& a, const Crowd& b);

/// Connected components of are_connected, ordered by (start, participant
/// count descending, first crowd). Hulls are filled when a registry is given.
std::vector<UnusualEvent> build_events(std::span<const Crowd> unusual, const AntennaRegistry* registry = nullptr);

/// Counterclockwise hull without collinear points, starting at the lowest-left
/// vertex. One or two distinct points give a point or a segment. Throws on
/// empty input.
std::vector<GeoPoint> convex_hull(std::vector<GeoPoint> points);

/// Area of a simple polygon in km^2 under an equirectangular projection at
/// the reference latitude.
double polygon_area_km2(std::span<const GeoPoint> polygon, double reference_lat);

/// Largest distance (km, same projection) from the centroid of the points.
double spatial_radius_km(std::span<const GeoPoint> points, double reference_lat);

}  // namespace crowdlens
