#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fmsos/data_io.hpp"
#include "fmsos/errors.hpp"

using namespace fmsos;

namespace {

const std::string kFixtures = FMSOS_FIXTURES;

UnitVector e(int i) { return UnitVector::basis(3, i); }

std::string parse_error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& err) {
    return err.kind();
  }
  return "none";
}

} // namespace

TEST_CASE("geographic conversions") {
  CHECK((geo_to_unit(GeoPoint::make(0, 0)).coords() - e(0).coords()).norm() < 1e-15);
  CHECK((geo_to_unit(GeoPoint::make(0, 90)).coords() - e(1).coords()).norm() < 1e-15);
  CHECK((geo_to_unit(GeoPoint::make(90, 17)).coords() - e(2).coords()).norm() < 1e-15);
  CHECK(GeoPoint::make(10, 190).lon == doctest::Approx(-170));
  CHECK(GeoPoint::make(10, 180).lon == doctest::Approx(-180));
  CHECK(GeoPoint::make(10, -180).lon == doctest::Approx(-180));
  CHECK_THROWS_AS(GeoPoint::make(91, 0), DomainError);
  CHECK_THROWS_AS(GeoPoint::make(std::nan(""), 0), DomainError);
  CHECK(unit_to_geo(e(2)).lon == 0.0);

  for (double lat = -85; lat <= 85; lat += 8.5) {
    for (double lon = -180; lon < 180; lon += 17.3) {
      const GeoPoint back = unit_to_geo(geo_to_unit(GeoPoint::make(lat, lon)));
      CHECK(std::abs(back.lat - lat) < 1e-9);
      CHECK(std::abs(back.lon - lon) < 1e-9);
    }
  }
}

TEST_CASE("HURDAT2 fixture") {
  const auto tracks = load_hurdat2(kFixtures + "/hurdat2_small.txt");
  REQUIRE(tracks.size() == 3);
  CHECK(tracks[0].storm_id == "EP011949");
  CHECK(tracks[0].name == "UNNAMED");
  REQUIRE(tracks[0].fixes.size() == 2);
  CHECK(tracks[0].fixes[0].location.lat == doctest::Approx(20.2));
  CHECK(tracks[0].fixes[0].location.lon == doctest::Approx(-106.3));
  CHECK(tracks[0].fixes[1].timestamp == 194906110600);
  CHECK(tracks[2].fixes[1].record_id == "L");
  CHECK(tracks[2].fixes[1].status == "HU");
  CHECK(tracks[2].fixes[1].extra == std::vector<std::string>{"65", "980"});

  const TrackPairs pairs = tracks_to_regression_pairs(tracks);
  CHECK(pairs.skipped == 1);
  REQUIRE(pairs.data.size() == 2);
  CHECK((pairs.data.x(1).coords() - e(0).coords()).norm() < 1e-12);
  CHECK((pairs.data.y(1).coords() - e(1).coords()).norm() < 1e-12);
}

TEST_CASE("HURDAT2 hemisphere rule and errors") {
  const std::string one = "EP011949, UNNAMED, 2,\n"
                          "19490611, 0000,  , TS, 28.0N, 94.8W, 45\n"
                          "19490611, 0600,  , TS, 28.0S, 94.8E, 45\n";
  const auto t = parse_hurdat2(one);
  REQUIRE(t.size() == 1);
  CHECK(t[0].fixes[0].location.lat == doctest::Approx(28.0));
  CHECK(t[0].fixes[0].location.lon == doctest::Approx(-94.8));
  CHECK(t[0].fixes[1].location.lat == doctest::Approx(-28.0));
  CHECK(t[0].fixes[1].location.lon == doctest::Approx(94.8));
  CHECK(parse_hurdat2("").empty());
  CHECK(parse_hurdat2("\n\n").empty());

  CHECK(parse_error_kind([] { parse_hurdat2("nonsense\n"); }) == "MalformedHeader");
  CHECK(parse_error_kind([] { parse_hurdat2("EP011949, A, 2,\n19490611, 0000,  , TS, 28.0N, 94.8W\n"); }) ==
        "RowCountMismatch");
  CHECK(parse_error_kind([] { parse_hurdat2("EP011949, A, 1,\n19490611, 0000,  , TS, 28.0Q, 94.8W\n"); }) ==
        "BadCoordinate");
  CHECK(parse_error_kind([] { parse_hurdat2("EP011949, A, 1,\n19490611, 2x00,  , TS, 28.0N, 94.8W\n"); }) ==
        "BadTimestamp");
  CHECK(parse_error_kind([] { parse_hurdat2("EP011949, A, 1,\n19490611, 0000,  , TS, 98.0N, 94.8W\n"); }) ==
        "BadCoordinate");
  try {
    parse_hurdat2("EP011949, A, 1,\n19490611, 0000,  , TS, 28.0Q, 94.8W\n");
  } catch (const ParseError& err) {
    CHECK(err.line() == 2);
  }
  CHECK_THROWS_AS(load_hurdat2(kFixtures + "/does_not_exist.txt"), DataError);
}

TEST_CASE("pairs CSV in unit-vector layout") {
  const Dataset d = load_pairs_csv(kFixtures + "/pairs_unit.csv", PairsFormat::kUnitVectors);
  REQUIRE(d.size() == 3);
  CHECK(d.x(0) == e(0));
  CHECK(d.y(0) == e(1));
  CHECK(d.x(2).coords().norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(parse_error_kind([] { parse_pairs_csv("x1,x2,x3,y1,y2,y3\n0.5,0,0,0,1,0\n", PairsFormat::kUnitVectors); }) ==
        "BadNorm");
  CHECK(parse_error_kind([] { parse_pairs_csv("x1,x2,x3,y1,y2,y3\n1,0,0,0,1\n", PairsFormat::kUnitVectors); }) ==
        "MissingColumn");
  CHECK(parse_error_kind([] { parse_pairs_csv("x1,x2,x3,y1,y2,y3\n1,0,zero,0,1,0\n", PairsFormat::kUnitVectors); }) ==
        "BadNumber");
}

TEST_CASE("pairs CSV in lon/lat layout") {
  const Dataset d = load_pairs_csv(kFixtures + "/pairs_lonlat.csv", PairsFormat::kLonLat);
  REQUIRE(d.size() == 2);
  CHECK((d.x(0).coords() - e(0).coords()).norm() < 1e-15);
  CHECK((d.y(0).coords() - e(1).coords()).norm() < 1e-15);
  CHECK(parse_error_kind([] { parse_pairs_csv("x_lon,x_lat,y_lon,y_lat\n0,95,0,0\n", PairsFormat::kLonLat); }) ==
        "BadCoordinate");
  CHECK(pairs_format_from_name("lonlat") == PairsFormat::kLonLat);
  CHECK(std::string(pairs_format_name(PairsFormat::kUnitVectors)) == "unit");
  CHECK_THROWS_AS(pairs_format_from_name("xyz"), ConfigError);
}

TEST_CASE("pairs CSV write/read round trip is exact") {
  Rng rng = make_rng(111);
  kernels::PointMatrix x(4, 50);
  kernels::PointMatrix y(4, 50);
  for (int i = 0; i < 50; ++i) {
    x.col(i) = sample_uniform_sphere(3, rng).coords();
    y.col(i) = sample_uniform_sphere(3, rng).coords();
  }
  const Dataset d(x, y);
  std::ostringstream out;
  write_pairs_csv(out, d, {{"seed", "111"}});
  CHECK(out.str().rfind("# seed=111\n", 0) == 0);
  const Dataset back = parse_pairs_csv(out.str(), PairsFormat::kUnitVectors);
  CHECK(back.x() == d.x());
  CHECK(back.y() == d.y());
}
