#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crowdlens/clusterer.hpp"
#include "crowdlens/ingest.hpp"

namespace crowdlens::testing {

/// One cluster: antenna index and member user indices.
using ClusterSpec = std::pair<std::uint32_t, std::vector<std::uint32_t>>;

inline ClusterDB make_db(const std::vector<std::vector<ClusterSpec>>& spec) {
  std::vector<std::vector<CylindricalCluster>> by_t(spec.size());
  for (std::size_t t = 0; t < spec.size(); ++t) {
    for (const auto& [antenna, users] : spec[t]) {
      CylindricalCluster c;
      c.t = static_cast<GridIndex>(t);
      c.antenna = AntennaId{antenna};
      for (const auto u : users) c.members.push_back(UserId{u});
      std::sort(c.members.begin(), c.members.end());
      c.call_counts.assign(c.members.size(), 1);
      by_t[t].push_back(std::move(c));
    }
    std::sort(by_t[t].begin(), by_t[t].end(),
              [](const CylindricalCluster& a, const CylindricalCluster& b) { return a.antenna < b.antenna; });
  }
  return ClusterDB(std::move(by_t));
}

inline Dataset make_dataset(const std::string& antennas_csv, const std::string& calls_csv, Seconds half_window = 1800) {
  Dataset d;
  std::istringstream a(antennas_csv);
  d.antennas = load_antennas(a);
  std::istringstream c(calls_csv);
  d.calls = load_calls(c, d.antennas, 3600, half_window);
  return d;
}

}  // namespace crowdlens::testing
