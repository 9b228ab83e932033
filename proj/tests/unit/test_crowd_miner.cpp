#include <doctest.h>

#include "crowdlens/crowd_miner.hpp"
#include "../support.hpp"

using namespace crowdlens;
using crowdlens::testing::make_db;

namespace {

// Antennas A..F = 0..5, users u1..u4 = 0..3.
ClusterDB worked_example() {
  return make_db({{{0, {0, 1, 2}}, {1, {3}}}, {{2, {1, 3}}}, {{3, {0, 1, 2}}}, {{4, {0, 1}}, {5, {2}}}});
}

Params loose() {
  Params p;
  p.scale = 1;
  p.lifetime = 4;
  p.commitment = 1;
  p.commitment_probability = 0.2;
  return p;
}

std::vector<ChainLink> chain(GridIndex start, std::initializer_list<std::uint32_t> antennas) {
  std::vector<ChainLink> out;
  for (const auto a : antennas) out.push_back({start++, AntennaId{a}});
  return out;
}

Crowd crowd_of(std::vector<ChainLink> links) {
  Crowd c;
  c.chain = std::move(links);
  c.start = c.chain.front().t;
  c.end = c.chain.back().t;
  c.lifetime = static_cast<int>(c.chain.size());
  return c;
}

}  // namespace

TEST_CASE("existence_step") {
  CHECK(existence_step(1.0, 1, 3, false) == doctest::Approx(1.0 / 3));
  CHECK(existence_step(0.5, 2, 3, false) == doctest::Approx(1.0 / 3));
  CHECK(existence_step(0.07, 5, 10, true) == 1.0);
  CHECK_THROWS_AS(existence_step(1.0, 1, 0, false), Error);
  CHECK_THROWS_AS(existence_step(1.0, 4, 3, false), Error);
}

TEST_CASE("carry ratio counts observed members only") {
  const std::vector<UserId> a{UserId{0}, UserId{1}, UserId{2}}, b{UserId{1}, UserId{3}};
  CHECK(carry_ratio(a, b) == doctest::Approx(1.0 / 3));
  CHECK(carry_ratio(b, a) == doctest::Approx(0.5));
  CHECK(carry_ratio(a, {}) == 0.0);
}

TEST_CASE("worked example extension from A to C") {
  const auto db = worked_example();
  auto p = loose();
  p.commitment = 4;
  const auto seed = seed_candidate(db, 0, 0);
  const auto ext = candidate_cluster_search(db, seed, 1, p);
  REQUIRE(ext.size() == 1);
  const auto& alive = ext[0].existence.alive;
  REQUIRE(alive.size() == 4);
  CHECK(alive[0].probability == doctest::Approx(1.0 / 3));
  CHECK(alive[1].probability == 1.0);
  CHECK(alive[2].probability == doctest::Approx(1.0 / 3));
  CHECK(alive[3].probability == 1.0);

  p.commitment_probability = 0.5;
  CHECK(candidate_cluster_search(db, seed, 1, p).empty());
}

TEST_CASE("zero carry is never admissible with a positive eps_p") {
  const auto db = make_db({{{0, {0, 1, 2}}}, {{1, {3, 4}}}});
  auto p = loose();
  CHECK(candidate_cluster_search(db, seed_candidate(db, 0, 0), 1, p).empty());
  p.commitment_probability = 0.0;
  const auto ext = candidate_cluster_search(db, seed_candidate(db, 0, 0), 1, p);
  REQUIRE(ext.size() == 1);
  CHECK(ext[0].existence.alive.size() == 5);
}

TEST_CASE("worked example probability table for user4") {
  const auto db = worked_example();
  const auto c = materialize_crowd(db, chain(0, {0, 2, 3, 4}), loose());
  CHECK(c.committed.size() == 4);
  const auto& u4 = c.existence[3];
  CHECK(u4[0] == 0.0);
  CHECK(u4[1] == 1.0);
  CHECK(u4[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(u4[3] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(c.existence[2][1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(c.distinct_antennas == 4);
  CHECK_THROWS_AS(materialize_crowd(db, chain(0, {0, 2, 5}), loose()), Error);
}

TEST_CASE("mine_closed_crowds on the worked example") {
  const auto db = worked_example();
  const auto crowds = mine_closed_crowds(db, loose());
  const auto target = chain(0, {0, 2, 3, 4});
  bool found = false;
  for (const auto& c : crowds) {
    found = found || c.chain == target;
    CHECK(c.lifetime >= 4);
    CHECK(c.committed.size() >= 1);
    for (const auto& row : c.existence)
      for (std::size_t k = 0; k < row.size(); ++k)
        if (row[k] > 0.0) CHECK(reaches(row[k], 0.2));
  }
  CHECK(found);
  for (std::size_t i = 0; i < crowds.size(); ++i)
    for (std::size_t j = 0; j < crowds.size(); ++j)
      if (i != j) CHECK_FALSE(is_subchain(crowds[i].chain, crowds[j].chain));
}

TEST_CASE("a static antenna chain is not a crowd") {
  const auto db = make_db({{{0, {0, 1, 2}}}, {{0, {0, 1, 2}}}, {{0, {0, 1, 2}}}, {{0, {0, 1, 2}}}});
  CHECK(mine_closed_crowds(db, loose()).empty());
}

TEST_CASE("single cluster and empty databases") {
  CHECK(mine_closed_crowds(make_db({{{0, {0, 1}}}}), loose()).empty());
  CHECK(mine_closed_crowds(ClusterDB{}, loose()).empty());
}

TEST_CASE("subchains and the closedness bucket") {
  const auto c2 = crowd_of(chain(1, {1, 2, 3, 4}));
  const auto c3 = crowd_of(chain(2, {2, 3, 4}));
  CHECK(is_subchain(c3.chain, c2.chain));
  CHECK_FALSE(is_subchain(c2.chain, c3.chain));
  CHECK_FALSE(is_subchain(chain(2, {2, 4}), c2.chain));
  CHECK_FALSE(is_subchain(chain(1, {2, 3}), c2.chain));

  std::vector<Crowd> bucket{c2};
  CHECK_FALSE(is_closed(c3, bucket));
  CHECK_FALSE(is_closed(c2, bucket));
  const auto prefix = crowd_of(chain(1, {1, 2, 3}));
  CHECK(is_closed(prefix, std::vector<Crowd>{crowd_of(chain(3, {3, 4, 5}))}));
}

TEST_CASE("a valid extension hides the shorter crowd") {
  // Five users walk A,B,C,D,E; only the five-step crowd is closed.
  const std::vector<std::uint32_t> g{0, 1, 2, 3, 4};
  const auto db = make_db({{{0, g}}, {{1, g}}, {{2, g}}, {{3, g}}, {{4, g}}});
  auto p = loose();
  p.commitment = 5;
  p.scale = 5;
  const auto crowds = mine_closed_crowds(db, p);
  REQUIRE(crowds.size() == 1);
  CHECK(crowds[0].lifetime == 5);
  CHECK(crowds[0].committed.size() == 5);
}

TEST_CASE("trace records candidate statistics") {
  MinerTrace trace;
  mine_closed_crowds(worked_example(), loose(), &trace);
  REQUIRE(trace.per_t.size() == 4);
  CHECK(trace.per_t[0].candidates == 2);
  CHECK(trace.per_t[3].max_lifetime == 4);
}
