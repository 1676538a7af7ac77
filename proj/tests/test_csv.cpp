#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gm3/csv.hpp"
#include "gm3/errors.hpp"
#include "gm3/sim.hpp"

using namespace gm3;

TEST_SUITE("csv") {

TEST_CASE("numbers round-trip through the cell format") {
  for (double x : {0.0, 1.0, -2.5, 1e-12, 6.0500421234567, 1.0 / 3.0}) {
    CHECK(std::stod(format_number(x)) == doctest::Approx(x).epsilon(1e-11));
  }
  CHECK(format_number(1.25) == "1.25");
}

TEST_CASE("read columns by name") {
  std::istringstream in("t,x,u\r\n0,1,2\n\n1,3,4\n");
  const auto t = read_csv(in);
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == 2);
  CHECK(t.column("u") == std::vector<double>{2.0, 4.0});
  CHECK_THROWS_AS(t.column("w"), Error);

  std::istringstream bad("a,b\n1,x\n");
  CHECK_THROWS_AS(read_csv(bad).column("b"), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), Error);
}

TEST_CASE("track and event rows") {
  const auto path = std::filesystem::temp_directory_path() / "gm3_track_test.csv";
  {
    CsvWriter out(path.string(), kTrackHeader);
    TrackSample s;
    s.t = 2.0;
    s.spikes.push_back({0, 0.25, 3.0});
    s.spikes.push_back({1, -0.25, 3.0});
    write_track_sample(out, s);
    write_track_sample(out, TrackSample{});
  }
  std::ifstream in(path);
  const auto t = read_csv(in);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.column("count") == std::vector<double>{2.0, 2.0, 0.0});
  CHECK(t.column("spike_id")[2] == -1.0);
  CHECK(std::isnan(t.column("position")[2]));
  std::filesystem::remove(path);

  std::ostringstream os;
  {
    const auto epath = std::filesystem::temp_directory_path() / "gm3_event_test.csv";
    CsvWriter out(epath.string(), kEventHeader);
    write_event(out, {3.5, Event::Type::Nucleation, "count 1->2"});
    out.stream().flush();
    std::ifstream ein(epath);
    os << ein.rdbuf();
    std::filesystem::remove(epath);
  }
  CHECK(os.str() == "t,type,detail\n3.5,Nucleation,count 1->2\n");
}

TEST_CASE("unwritable path") {
  CHECK_THROWS_AS(CsvWriter("/nonexistent-dir/x.csv", "a"), Error);
}

}
