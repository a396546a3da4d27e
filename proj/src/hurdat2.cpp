#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/algorithm/string/classification.hpp>
#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include "fmsos/data_io.hpp"
#include "fmsos/errors.hpp"

namespace fmsos {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  boost::algorithm::split(fields, line, boost::algorithm::is_any_of(","));
  for (auto& f : fields) boost::algorithm::trim(f);
  // HURDAT2 lines end with a trailing comma.
  if (!fields.empty() && fields.back().empty()) fields.pop_back();
  return fields;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool looks_like_header(const std::vector<std::string>& f) {
  return f.size() >= 3 && f[0].size() == 8 && std::isalpha(static_cast<unsigned char>(f[0][0])) &&
         std::isalpha(static_cast<unsigned char>(f[0][1])) && all_digits(f[0].substr(2));
}

bool looks_like_row(const std::vector<std::string>& f) {
  return f.size() >= 6 && f[0].size() == 8 && all_digits(f[0]);
}

// "28.0N" -> 28.0, "94.8W" -> -94.8.
double parse_hemisphere(const std::string& token, char positive, char negative, std::size_t line) {
  if (token.size() < 2) throw ParseError("BadCoordinate", line, "coordinate '" + token + "'");
  const char hemi = static_cast<char>(std::toupper(static_cast<unsigned char>(token.back())));
  if (hemi != positive && hemi != negative) {
    throw ParseError("BadCoordinate", line, "coordinate '" + token + "' lacks a hemisphere suffix");
  }
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size() - 1;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value) || value < 0.0) {
    throw ParseError("BadCoordinate", line, "coordinate '" + token + "'");
  }
  return hemi == negative ? -value : value;
}

} // namespace

GeoPoint GeoPoint::make(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || std::abs(lat) > 90.0) {
    throw DomainError("latitude must lie in [-90, 90] and both coordinates must be finite");
  }
  double l = std::fmod(lon + 180.0, 360.0);
  if (l < 0.0) l += 360.0;
  l -= 180.0;
  if (l >= 180.0) l -= 360.0;
  return GeoPoint{lat, l};
}

UnitVector geo_to_unit(const GeoPoint& g) {
  const double lat = g.lat * kDeg;
  const double lon = g.lon * kDeg;
  Eigen::Vector3d v(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
  return UnitVector::normalized(v);
}

GeoPoint unit_to_geo(const UnitVector& u) {
  if (u.dim() != 3) throw DomainError("longitude/latitude needs a point on S^2");
  const auto& v = u.coords();
  const double lat = std::asin(std::clamp(v[2], -1.0, 1.0)) / kDeg;
  const double lon = (std::hypot(v[0], v[1]) > 0.0 ? std::atan2(v[1], v[0]) : 0.0) / kDeg;
  return GeoPoint::make(lat, lon);
}

std::vector<StormTrack> parse_hurdat2(const std::string& text) {
  std::vector<StormTrack> tracks;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t remaining = 0;
  std::size_t header_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    const std::vector<std::string> f = split_fields(line);

    if (remaining == 0) {
      if (looks_like_row(f)) {
        throw ParseError("RowCountMismatch", line_no, "data row beyond the count declared at line " +
                                                          std::to_string(header_line));
      }
      if (!looks_like_header(f) || !all_digits(f[2])) {
        throw ParseError("MalformedHeader", line_no, "expected 'BASINnnYYYY, NAME, count,'");
      }
      StormTrack track;
      track.storm_id = f[0];
      track.name = f[1];
      remaining = std::stoul(f[2]);
      header_line = line_no;
      if (remaining == 0) throw ParseError("MalformedHeader", line_no, "storm declares zero rows");
      tracks.push_back(std::move(track));
      continue;
    }

    if (!looks_like_row(f)) {
      if (looks_like_header(f)) {
        throw ParseError("RowCountMismatch", line_no, "storm " + tracks.back().storm_id + " is " +
                                                          std::to_string(remaining) + " rows short");
      }
      throw ParseError("BadTimestamp", line_no, "expected a data row starting with YYYYMMDD");
    }
    if (f[1].size() != 4 || !all_digits(f[1])) {
      throw ParseError("BadTimestamp", line_no, "time '" + f[1] + "'");
    }
    StormFix fix;
    fix.timestamp = std::stoll(f[0]) * 10000 + std::stoll(f[1]);
    fix.record_id = f[2];
    fix.status = f[3];
    const double lat = parse_hemisphere(f[4], 'N', 'S', line_no);
    const double lon = parse_hemisphere(f[5], 'E', 'W', line_no);
    if (std::abs(lat) > 90.0 || lon < -180.0 || lon >= 360.0) {
      throw ParseError("BadCoordinate", line_no, "coordinate out of range");
    }
    fix.location = GeoPoint::make(lat, lon);
    fix.extra.assign(f.begin() + 6, f.end());
    auto& fixes = tracks.back().fixes;
    if (!fixes.empty() && fix.timestamp < fixes.back().timestamp) {
      throw ParseError("BadTimestamp", line_no, "fixes out of time order");
    }
    fixes.push_back(std::move(fix));
    --remaining;
  }
  if (remaining != 0) {
    throw ParseError("RowCountMismatch", line_no, "input ended " + std::to_string(remaining) +
                                                      " rows short of the count at line " + std::to_string(header_line));
  }
  return tracks;
}

std::vector<StormTrack> load_hurdat2(const std::string& path) { return parse_hurdat2(read_file(path)); }

TrackPairs tracks_to_regression_pairs(const std::vector<StormTrack>& tracks) {
  std::vector<const StormTrack*> usable;
  std::size_t skipped = 0;
  for (const auto& t : tracks) {
    if (t.fixes.size() >= 2) {
      usable.push_back(&t);
    } else {
      ++skipped;
    }
  }
  kernels::PointMatrix x(3, static_cast<Eigen::Index>(usable.size()));
  kernels::PointMatrix y(3, static_cast<Eigen::Index>(usable.size()));
  for (std::size_t i = 0; i < usable.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = geo_to_unit(usable[i]->fixes.front().location).coords();
    y.col(static_cast<Eigen::Index>(i)) = geo_to_unit(usable[i]->fixes.back().location).coords();
  }
  return TrackPairs{Dataset(std::move(x), std::move(y)), skipped};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace fmsos
