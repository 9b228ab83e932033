#include <doctest.h>

#include <sstream>

#include "crowdlens/ingest.hpp"
#include "../support.hpp"

using namespace crowdlens;

namespace {

const char* kAntennas = "antenna_id,longitude,latitude\nA,-4.0,5.3\nB,-4.01,5.31\n";

AntennaRegistry registry() {
  std::istringstream in(kAntennas);
  return load_antennas(in);
}

}  // namespace

TEST_CASE("load_antennas") {
  CHECK(registry().size() == 2);
  CHECK(registry().find("B")->value == 1);

  std::istringstream bad_lat("antenna_id,longitude,latitude\nA,-4.0,95\n");
  CHECK_THROWS_AS(load_antennas(bad_lat), Error);

  std::istringstream empty("antenna_id,longitude,latitude\n");
  CHECK_THROWS_WITH_AS(load_antennas(empty), doctest::Contains("no antennas"), Error);

  std::istringstream dup("antenna_id,longitude,latitude\nA,1,1\nA,2,2\n");
  CHECK_THROWS_WITH_AS(load_antennas(dup), doctest::Contains("A"), Error);

  std::istringstream malformed("antenna_id,longitude,latitude\nA,1,1\nB,x,2\n");
  CHECK_THROWS_WITH_AS(load_antennas(malformed), doctest::Contains("line 3"), Error);
}

TEST_CASE("ids are interned in lexicographic order") {
  std::istringstream in("antenna_id,longitude,latitude\nZ,0,0\nM,0,0\nA,0,0\n");
  const auto r = load_antennas(in);
  CHECK(r.name(AntennaId{0}) == "A");
  CHECK(r.name(AntennaId{2}) == "Z");
}

TEST_CASE("load_calls admits, skips and counts") {
  const auto reg = registry();
  std::istringstream in(
      "user_id,timestamp,antenna_id\n"
      "u1,2015-01-05T00:00:00Z,A\n"
      "u2,2015-01-05T01:10:00Z,B\n"
      "u3,2015-01-05T02:00:00Z,A\n"
      "u4,2015-01-05T02:00:00Z,Q\n"
      "u5,not-a-time,A\n"
      "garbage\n");
  const auto loaded = load_calls(in, reg);
  CHECK(loaded.report.admitted == 3);
  CHECK(loaded.report.unknown_antenna == 1);
  CHECK(loaded.report.malformed == 2);
  CHECK(loaded.index.total() == 3);
  CHECK(loaded.index.grid().n_steps == 3);
  CHECK(to_json(loaded.report) == R"({"admitted":3,"unknown_antenna":1,"out_of_range":0,"malformed":2})");
}

TEST_CASE("fixed grid counts calls outside every window") {
  const auto reg = registry();
  TimeGrid g;
  g.origin = 1420416000;
  g.n_steps = 2;
  std::istringstream in(
      "user_id,timestamp,antenna_id\n"
      "u1,2015-01-05T00:30:00Z,A\n"
      "u1,2015-01-05T05:00:00Z,A\n");
  const auto loaded = load_calls(in, reg, g);
  CHECK(loaded.report.admitted == 1);
  CHECK(loaded.report.out_of_range == 1);
  // 00:30 sits on the boundary of both windows.
  CHECK(loaded.index.total() == 2);
  CHECK(loaded.index.at(0).size() == 1);
  CHECK(loaded.index.at(1).size() == 1);
}

TEST_CASE("split date/time header is accepted") {
  const auto reg = registry();
  std::istringstream in("user_id,date,time,antenna_id\nu1,2015-01-05,00:10:00,A\nu1,2015-01-05,01:00:00,B\n");
  const auto loaded = load_calls(in, reg);
  CHECK(loaded.report.admitted == 2);
  CHECK(loaded.calls[0].at == 1420416000 + 600);
}

TEST_CASE("unknown header is an error") {
  const auto reg = registry();
  std::istringstream in("who,when,where\n");
  CHECK_THROWS_AS(load_calls(in, reg), Error);
}

TEST_CASE("CSV round trip reproduces the index") {
  const auto reg = registry();
  std::istringstream in(
      "user_id,timestamp,antenna_id\n"
      "u2,2015-01-05T00:20:00Z,B\n"
      "u1,2015-01-05T00:30:00Z,A\n"
      "u1,2015-01-05T03:00:00Z,B\n");
  const auto first = load_calls(in, reg);
  std::ostringstream out;
  write_calls_csv(out, first.calls, first.users, reg);
  std::istringstream again(out.str());
  const auto second = load_calls(again, reg);
  CHECK(second.index == first.index);

  std::ostringstream ant;
  write_antennas_csv(ant, reg);
  std::istringstream ant_in(ant.str());
  CHECK(load_antennas(ant_in).size() == reg.size());
}

TEST_CASE("observation total equals the sum of window memberships") {
  const auto reg = registry();
  std::ostringstream csv;
  csv << "user_id,timestamp,antenna_id\n";
  for (int i = 0; i < 200; ++i)
    csv << "u" << i % 7 << "," << format_iso8601(1420416000 + i * 900) << "," << (i % 3 ? "A" : "B") << "\n";
  std::istringstream in(csv.str());
  const auto loaded = load_calls(in, reg);
  std::size_t expected = 0;
  for (const auto& c : loaded.calls) expected += grid_index_of(c.at, loaded.index.grid()).size();
  CHECK(loaded.index.total() == expected);
}

TEST_CASE("inter-call gap histogram") {
  const auto mk = [](std::uint32_t u, int hour) { return Call{UserId{u}, 1420416000 + hour * 3600, AntennaId{0}}; };
  auto h = inter_call_gap_histogram(std::vector<Call>{mk(0, 0), mk(0, 1), mk(0, 2)});
  CHECK(h.size() == 1);
  CHECK(h[1] == doctest::Approx(1.0));

  h = inter_call_gap_histogram(std::vector<Call>{mk(0, 3), mk(0, 0), mk(0, 1)});
  CHECK(h[1] == doctest::Approx(0.5));
  CHECK(h[2] == doctest::Approx(0.5));

  CHECK(inter_call_gap_histogram(std::vector<Call>{mk(0, 0), mk(1, 5)}).empty());
}

TEST_CASE("load_dataset reports missing files") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/calls.csv", "/nonexistent/antennas.csv"), Error);
}
