#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fmsos/model.hpp"
#include "fmsos/sphere.hpp"

namespace fmsos {

/// Latitude/longitude in degrees; longitude is normalized to [-180, 180).
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  /// Throws DomainError for |lat| > 90 or non-finite input.
  static GeoPoint make(double lat, double lon);
};

/// (cos lat cos lon, cos lat sin lon, sin lat).
UnitVector geo_to_unit(const GeoPoint& g);
/// Inverse of geo_to_unit; longitude is 0 at the poles.
GeoPoint unit_to_geo(const UnitVector& u);

struct StormFix {
  std::int64_t timestamp = 0; // YYYYMMDDhhmm
  GeoPoint location;
  std::string record_id;
  std::string status;
  std::vector<std::string> extra; // wind, pressure and radii columns, untouched
};

struct StormTrack {
  std::string storm_id;
  std::string name;
  std::vector<StormFix> fixes;
};

/// Parses HURDAT2 text. ParseError kinds: MalformedHeader, RowCountMismatch,
/// BadCoordinate, BadTimestamp.
std::vector<StormTrack> parse_hurdat2(const std::string& text);
std::vector<StormTrack> load_hurdat2(const std::string& path);

struct TrackPairs {
  Dataset data;
  std::size_t skipped = 0; // tracks with a single fix
};

/// First fix as covariate, last fix as response.
TrackPairs tracks_to_regression_pairs(const std::vector<StormTrack>& tracks);

enum class PairsFormat { kUnitVectors, kLonLat };

PairsFormat pairs_format_from_name(const std::string& name);
const char* pairs_format_name(PairsFormat format);

/// Reads a pairs CSV with a header row. Lines starting with '#' are ignored.
///  kUnitVectors: columns x1..x{p+1}, y1..y{p+1}; rows with norms in [0.99, 1.01]
///                are renormalized, others raise BadNorm.
///  kLonLat:      columns x_lon, x_lat, y_lon, y_lat in degrees.
/// Other ParseError kinds: MissingColumn, BadNumber.
Dataset parse_pairs_csv(const std::string& text, PairsFormat format);
Dataset load_pairs_csv(const std::string& path, PairsFormat format);

using Prologue = std::vector<std::pair<std::string, std::string>>;

/// Unit-vector CSV with a '#'-commented prologue; round-trips through load_pairs_csv.
void write_pairs_csv(std::ostream& out, const Dataset& data, const Prologue& prologue = {});
void write_pairs_csv(const std::string& path, const Dataset& data, const Prologue& prologue = {});

/// Reads a whole file; throws DataError if it cannot be opened.
std::string read_file(const std::string& path);

} // namespace fmsos
