#pragma once

#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "crowdlens/ingest.hpp"
#include "crowdlens/model.hpp"

namespace crowdlens {

/// Users resolved to one antenna at one grid index, at least `scale` of them.
struct CylindricalCluster {
  GridIndex t = 0;
  AntennaId antenna;
  std::vector<UserId> members;           // sorted
  std::vector<std::uint32_t> call_counts;  // parallel to members

  [[nodiscard]] std::size_t size() const { return members.size(); }
  friend bool operator==(const CylindricalCluster&, const CylindricalCluster&) = default;
};

/// Most-called antenna; ties go to the antenna holding the earliest call, then
/// to the smaller antenna id. Throws on an empty map.
AntennaId resolve_position(const std::map<AntennaId, std::vector<TimePoint>>& observations);

/// Clusters at one grid index, ordered by antenna id.
std::vector<CylindricalCluster> detect_clusters(const CallIndex& index, GridIndex t, const Params& params);

class ClusterDB {
public:
  ClusterDB() = default;
  explicit ClusterDB(std::vector<std::vector<CylindricalCluster>> by_t) : by_t_(std::move(by_t)) {}

  [[nodiscard]] GridIndex n_steps() const { return static_cast<GridIndex>(by_t_.size()); }
  [[nodiscard]] std::span<const CylindricalCluster> at(GridIndex t) const { return by_t_.at(static_cast<std::size_t>(t)); }
  [[nodiscard]] const CylindricalCluster& at(GridIndex t, std::size_t i) const { return by_t_.at(static_cast<std::size_t>(t)).at(i); }
  /// Position of the cluster at (t, antenna), or -1.
  [[nodiscard]] std::ptrdiff_t find(GridIndex t, AntennaId antenna) const;
  [[nodiscard]] std::size_t total() const;
  friend bool operator==(const ClusterDB&, const ClusterDB&) = default;

private:
  std::vector<std::vector<CylindricalCluster>> by_t_;
};

/// detect_clusters at every grid index; `threads` == 0 picks the hardware
/// concurrency. The result does not depend on the thread count.
ClusterDB cluster_stream(const CallIndex& index, const Params& params, unsigned threads = 0);

/// JSON lines: {"t", "antenna_id", "members"}.
void dump_clusters(std::ostream& out, const ClusterDB& db, const AntennaRegistry& registry, const UserDictionary& users);

}  // namespace crowdlens
