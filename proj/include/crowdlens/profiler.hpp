#pragma once

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "crowdlens/crowd_miner.hpp"
#include "crowdlens/ingest.hpp"
#include "crowdlens/model.hpp"

namespace crowdlens {

/// Per-user hour-of-day histograms of visited antennas.
class ProfileStore {
public:
  struct UserProfile {
    std::array<std::vector<std::pair<AntennaId, std::uint32_t>>, 24> by_hour;  // sorted by antenna
    std::array<std::uint32_t, 24> totals{};
    /// One entry per admitted (call, grid index) pair, sorted; empty when the
    /// store was loaded from a file.
    std::vector<std::pair<GridIndex, AntennaId>> visits;
  };

  ProfileStore() = default;
  ProfileStore(TimeGrid grid, std::vector<UserProfile> users) : grid_(grid), users_(std::move(users)) {}

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t n_users() const { return users_.size(); }
  [[nodiscard]] std::uint32_t count(UserId u, int hour, AntennaId a) const;
  [[nodiscard]] std::uint32_t total(UserId u, int hour) const;
  [[nodiscard]] const UserProfile* find(UserId u) const;
  /// Whether per-call history is present (needed to hold a span out).
  [[nodiscard]] bool has_history() const { return has_history_; }
  void set_has_history(bool v) { has_history_ = v; }

private:
  TimeGrid grid_;
  std::vector<UserProfile> users_;
  bool has_history_ = true;
};

/// Single pass over the admitted calls; each (call, grid index) pair counts
/// once under the hour of day of that grid index.
ProfileStore build_profiles(std::span<const Call> calls, const TimeGrid& grid, std::size_t n_users);

/// w_m along a chain: share of the user's calls at hour(t_k) that were made at
/// antenna a_k, 0 when the user has no calls at that hour. With `holdout`, the
/// user's calls inside that grid span are left out of both counts.
std::vector<double> profile_vector(const ProfileStore& store, UserId user, std::span<const ChainLink> chain,
                                   std::optional<std::pair<GridIndex, GridIndex>> holdout = std::nullopt);

/// Cosine similarity, 0 when either vector has zero norm. Throws on length mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

struct UserSimilarity {
  UserId user;
  std::vector<double> w_c;
  std::vector<double> w_m;
  double cosine = 0.0;
};

struct SimilarityReport {
  std::vector<UserSimilarity> users;
  double mean = 0.0;
};

struct Classification {
  bool unusual = false;
  SimilarityReport report;
};

/// Unusual iff the mean cosine over committed users is strictly below eps_si.
Classification classify_unusual(const Crowd& crowd, const ProfileStore& store, const Params& params);

/// JSON: {"format": "crowdlens-profiles", "version": 1, "grid": {...},
///        "counts": {"user/hour/antenna": n, ...}}
void save_profiles(std::ostream& out, const ProfileStore& store, const UserDictionary& users,
                   const AntennaRegistry& registry);
/// Interns unseen users into `users`. The loaded store has no call history.
ProfileStore load_profiles(std::istream& in, UserDictionary& users, const AntennaRegistry& registry);

}  // namespace crowdlens
