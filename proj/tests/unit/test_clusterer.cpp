#include <doctest.h>

#include <set>
#include <sstream>

#include "crowdlens/clusterer.hpp"
#include "../support.hpp"

using namespace crowdlens;
using crowdlens::testing::make_dataset;

namespace {

const TimePoint kT0 = 1420416000;

std::string calls_csv(const std::vector<std::tuple<std::string, TimePoint, std::string>>& rows) {
  std::ostringstream out;
  out << "user_id,timestamp,antenna_id\n";
  for (const auto& [u, at, a] : rows) out << u << ',' << format_iso8601(at) << ',' << a << '\n';
  return out.str();
}

const char* kSixAntennas = "antenna_id,longitude,latitude\nA,0,0\nB,0,1\nC,1,0\nD,1,1\nE,2,0\nF,2,1\n";

Dataset two_step_dataset() {
  return make_dataset(kSixAntennas, calls_csv({{"u1", kT0, "A"},
                                               {"u2", kT0, "A"},
                                               {"u3", kT0, "A"},
                                               {"u4", kT0, "B"},
                                               {"u2", kT0 + 3600, "C"},
                                               {"u4", kT0 + 3600, "C"},
                                               {"u1", kT0 + 7200, "D"},
                                               {"u2", kT0 + 7200, "D"},
                                               {"u3", kT0 + 7200, "D"},
                                               {"u1", kT0 + 10800, "E"},
                                               {"u2", kT0 + 10800, "E"},
                                               {"u3", kT0 + 10800, "F"}}));
}

std::vector<std::string> names(const CylindricalCluster& c, const UserDictionary& users) {
  std::vector<std::string> out;
  for (const auto u : c.members) out.push_back(users.name(u));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("resolve_position tie-breaks") {
  const AntennaId a{0}, b{1};
  CHECK(resolve_position({{a, {10, 20}}, {b, {5}}}) == a);
  CHECK(resolve_position({{a, {10}}, {b, {5}}}) == b);
  CHECK(resolve_position({{a, {10 * 60 + 5}}, {b, {10 * 60 + 20}}}) == a);
  CHECK(resolve_position({{b, {600}}, {a, {600}}}) == a);
  CHECK_THROWS_AS(resolve_position({}), Error);
}

TEST_CASE("worked example clusters at t1") {
  const auto d = two_step_dataset();
  Params p;
  p.scale = 1;
  p.commitment = 1;
  const auto clusters = detect_clusters(d.calls.index, 0, p);
  REQUIRE(clusters.size() == 2);
  CHECK(d.antennas.name(clusters[0].antenna) == "A");
  CHECK(names(clusters[0], d.calls.users) == std::vector<std::string>{"u1", "u2", "u3"});
  CHECK(d.antennas.name(clusters[1].antenna) == "B");
  CHECK(names(clusters[1], d.calls.users) == std::vector<std::string>{"u4"});

  const auto db = cluster_stream(d.calls.index, p);
  CHECK(db.n_steps() == 4);
  CHECK(db.total() == 6);
  CHECK(db.at(1).size() == 1);
  CHECK(names(db.at(1, 0), d.calls.users) == std::vector<std::string>{"u2", "u4"});
  CHECK(db.find(3, *d.antennas.find("F")) == 1);
  CHECK(db.find(3, *d.antennas.find("A")) == -1);
}

TEST_CASE("scale threshold is inclusive") {
  std::vector<std::tuple<std::string, TimePoint, std::string>> rows;
  for (int i = 0; i < 20; ++i) rows.emplace_back("a" + std::to_string(i), kT0, "A");
  for (int i = 0; i < 5; ++i) rows.emplace_back("b" + std::to_string(i), kT0, "B");
  const auto d = make_dataset(kSixAntennas, calls_csv(rows));
  Params p;
  const auto clusters = detect_clusters(d.calls.index, 0, p);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].size() == 20);
}

TEST_CASE("a user joins one cluster per timestamp by majority") {
  const auto d = make_dataset(kSixAntennas, calls_csv({{"u1", kT0 - 600, "A"},
                                                       {"u1", kT0 + 600, "B"},
                                                       {"u1", kT0 + 900, "B"},
                                                       {"u2", kT0, "B"}}));
  Params p;
  p.scale = 1;
  p.commitment = 1;
  const auto clusters = detect_clusters(d.calls.index, 0, p);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].size() == 2);
  CHECK(clusters[0].call_counts == std::vector<std::uint32_t>{2, 1});
}

TEST_CASE("empty and silent timestamps") {
  const auto d = make_dataset(kSixAntennas, calls_csv({{"u1", kT0, "A"}, {"u1", kT0 + 5 * 3600, "A"}}));
  Params p;
  CHECK(detect_clusters(d.calls.index, 2, p).empty());
  const auto db = cluster_stream(d.calls.index, p);
  CHECK(db.n_steps() == 6);
  CHECK(db.total() == 0);
}

TEST_CASE("parallel and sequential clustering agree; members disjoint; eps_n monotone") {
  std::vector<std::tuple<std::string, TimePoint, std::string>> rows;
  std::uint64_t state = 12345;
  const auto next = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return state >> 33;
  };
  const char* ants[] = {"A", "B", "C", "D", "E", "F"};
  for (int i = 0; i < 4000; ++i)
    rows.emplace_back("u" + std::to_string(next() % 300), kT0 + static_cast<TimePoint>(next() % (24 * 3600)),
                      ants[next() % 6]);
  const auto d = make_dataset(kSixAntennas, calls_csv(rows));
  Params p;
  p.scale = 5;
  p.commitment = 1;
  const auto seq = cluster_stream(d.calls.index, p, 1);
  const auto par = cluster_stream(d.calls.index, p, 4);
  CHECK(seq == par);

  for (GridIndex t = 0; t < seq.n_steps(); ++t) {
    std::set<UserId> seen;
    for (const auto& c : seq.at(t))
      for (const auto u : c.members) CHECK(seen.insert(u).second);
  }

  Params higher = p;
  higher.scale = 12;
  const auto fewer = cluster_stream(d.calls.index, higher, 1);
  for (GridIndex t = 0; t < fewer.n_steps(); ++t)
    for (const auto& c : fewer.at(t)) {
      const auto pos = seq.find(t, c.antenna);
      REQUIRE(pos >= 0);
      CHECK(seq.at(t, static_cast<std::size_t>(pos)).members == c.members);
    }
  CHECK(fewer.total() <= seq.total());
}

TEST_CASE("cluster dump is JSON lines") {
  const auto d = two_step_dataset();
  Params p;
  p.scale = 1;
  p.commitment = 1;
  std::ostringstream out;
  dump_clusters(out, cluster_stream(d.calls.index, p), d.antennas, d.calls.users);
  const auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  CHECK(text.find(R"("antenna_id":"C")") != std::string::npos);
}
