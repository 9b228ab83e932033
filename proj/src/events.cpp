#include "crowdlens/events.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crowdlens {
namespace {

constexpr double kEarthRadiusKm = 6371.0088;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t root(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = root(a);
    b = root(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::pair<double, double> project(const GeoPoint& p, double reference_lat) {
  return {kEarthRadiusKm * p.lon * kDegToRad * std::cos(reference_lat * kDegToRad), kEarthRadiusKm * p.lat * kDegToRad};
}

}  // namespace

bool are_connected(const Crowd& a, const Crowd& b) {
  if (std::min(a.end, b.end) < std::max(a.start, b.start)) return false;
  std::vector<UserId> common;
  std::set_intersection(a.committed.begin(), a.committed.end(), b.committed.begin(), b.committed.end(),
                        std::back_inserter(common));
  const std::size_t both = a.committed.size() + b.committed.size() - common.size();
  return common.size() >= (both + 1) / 2;
}

std::vector<GeoPoint> convex_hull(std::vector<GeoPoint> pts) {
  if (pts.empty()) throw Error("convex_hull: no points");
  std::sort(pts.begin(), pts.end(), [](const GeoPoint& a, const GeoPoint& b) {
    return a.lon != b.lon ? a.lon < b.lon : a.lat < b.lat;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<GeoPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  // All points collinear: the chain degenerates to the two extremes.
  if (hull.size() == 2 || (hull.size() > 2 && std::abs(polygon_area_km2(hull, 0.0)) == 0.0))
    return {pts.front(), pts.back()};
  return hull;
}

double polygon_area_km2(std::span<const GeoPoint> polygon, double reference_lat) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto [x1, y1] = project(polygon[i], reference_lat);
    const auto [x2, y2] = project(polygon[(i + 1) % polygon.size()], reference_lat);
    twice += x1 * y2 - x2 * y1;
  }
  return std::abs(twice) / 2.0;
}

double spatial_radius_km(std::span<const GeoPoint> points, double reference_lat) {
  if (points.empty()) return 0.0;
  double cx = 0.0, cy = 0.0;
  for (const auto& p : points) {
    const auto [x, y] = project(p, reference_lat);
    cx += x;
    cy += y;
  }
  cx /= static_cast<double>(points.size());
  cy /= static_cast<double>(points.size());
  double r = 0.0;
  for (const auto& p : points) {
    const auto [x, y] = project(p, reference_lat);
    r = std::max(r, std::hypot(x - cx, y - cy));
  }
  return r;
}

std::vector<UnusualEvent> build_events(std::span<const Crowd> unusual, const AntennaRegistry* registry) {
  DisjointSets sets(unusual.size());
  for (std::size_t i = 0; i < unusual.size(); ++i)
    for (std::size_t j = i + 1; j < unusual.size(); ++j)
      if (are_connected(unusual[i], unusual[j])) sets.unite(i, j);

  std::vector<UnusualEvent> events;
  std::vector<std::ptrdiff_t> slot(unusual.size(), -1);
  for (std::size_t i = 0; i < unusual.size(); ++i) {
    const auto r = sets.root(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(events.size());
      events.emplace_back();
      events.back().start = unusual[i].start;
      events.back().end = unusual[i].end;
    }
    auto& e = events[static_cast<std::size_t>(slot[r])];
    e.crowds.push_back(i);
    e.start = std::min(e.start, unusual[i].start);
    e.end = std::max(e.end, unusual[i].end);
  }

  for (auto& e : events) {
    for (const auto i : e.crowds) {
      std::vector<UserId> merged;
      std::set_union(e.participants.begin(), e.participants.end(), unusual[i].committed.begin(),
                     unusual[i].committed.end(), std::back_inserter(merged));
      e.participants = std::move(merged);
    }
    if (registry) {
      std::vector<GeoPoint> pts;
      for (const auto i : e.crowds)
        for (const auto& link : unusual[i].chain) pts.push_back(registry->position(link.antenna));
      e.hull = convex_hull(std::move(pts));
    }
  }

  std::sort(events.begin(), events.end(), [](const UnusualEvent& a, const UnusualEvent& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.participants.size() != b.participants.size()) return a.participants.size() > b.participants.size();
    return a.crowds.front() < b.crowds.front();
  });
  return events;
}

}  // namespace crowdlens
