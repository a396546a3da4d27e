#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <boost/algorithm/string/classification.hpp>
#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include "fmsos/data_io.hpp"
#include "fmsos/errors.hpp"

namespace fmsos {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  boost::algorithm::split(fields, line, boost::algorithm::is_any_of(","));
  for (auto& f : fields) boost::algorithm::trim(f);
  return fields;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("BadNumber", line, "'" + s + "' is not a finite number");
  }
  return v;
}

std::size_t column(const std::map<std::string, std::size_t>& index, const std::string& name, std::size_t line) {
  const auto it = index.find(name);
  if (it == index.end()) throw ParseError("MissingColumn", line, "column '" + name + "' not found");
  return it->second;
}

Eigen::VectorXd checked_unit(Eigen::VectorXd v, std::size_t line) {
  const double n = v.norm();
  if (!(n >= 0.99 && n <= 1.01)) {
    throw ParseError("BadNorm", line, "vector norm " + std::to_string(n) + " outside [0.99, 1.01]");
  }
  // Rows written at full precision are already unit length; leave them bit-for-bit.
  if (std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return v;
  return v / n;
}

} // namespace

PairsFormat pairs_format_from_name(const std::string& name) {
  if (name == "unit") return PairsFormat::kUnitVectors;
  if (name == "lonlat") return PairsFormat::kLonLat;
  throw ConfigError("unknown data format '" + name + "' (expected unit or lonlat)");
}

const char* pairs_format_name(PairsFormat format) {
  return format == PairsFormat::kUnitVectors ? "unit" : "lonlat";
}

Dataset parse_pairs_csv(const std::string& text, PairsFormat format) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> index;
  std::size_t header_line = 0;
  std::vector<std::size_t> xcols;
  std::vector<std::size_t> ycols;
  std::vector<Eigen::VectorXd> xs;
  std::vector<Eigen::VectorXd> ys;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = boost::algorithm::trim_copy(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = split_csv(trimmed);

    if (header_line == 0) {
      header_line = line_no;
      for (std::size_t c = 0; c < fields.size(); ++c) index.emplace(fields[c], c);
      if (format == PairsFormat::kLonLat) {
        for (const char* name : {"x_lon", "x_lat", "y_lon", "y_lat"}) xcols.push_back(column(index, name, line_no));
      } else {
        for (std::size_t d = 1; index.count("x" + std::to_string(d)) != 0; ++d) {
          xcols.push_back(index.at("x" + std::to_string(d)));
        }
        if (xcols.size() < 2) throw ParseError("MissingColumn", line_no, "need at least columns x1, x2");
        for (std::size_t d = 1; d <= xcols.size(); ++d) {
          ycols.push_back(column(index, "y" + std::to_string(d), line_no));
        }
      }
      continue;
    }

    auto value = [&](std::size_t c) {
      if (c >= fields.size()) throw ParseError("MissingColumn", line_no, "row has too few fields");
      return parse_number(fields[c], line_no);
    };
    if (format == PairsFormat::kLonLat) {
      const double xlon = value(xcols[0]);
      const double xlat = value(xcols[1]);
      const double ylon = value(xcols[2]);
      const double ylat = value(xcols[3]);
      if (std::abs(xlat) > 90.0 || std::abs(ylat) > 90.0) {
        throw ParseError("BadCoordinate", line_no, "latitude outside [-90, 90]");
      }
      xs.push_back(geo_to_unit(GeoPoint::make(xlat, xlon)).coords());
      ys.push_back(geo_to_unit(GeoPoint::make(ylat, ylon)).coords());
    } else {
      Eigen::VectorXd x(static_cast<Eigen::Index>(xcols.size()));
      Eigen::VectorXd y(static_cast<Eigen::Index>(ycols.size()));
      for (std::size_t d = 0; d < xcols.size(); ++d) {
        x[static_cast<Eigen::Index>(d)] = value(xcols[d]);
        y[static_cast<Eigen::Index>(d)] = value(ycols[d]);
      }
      xs.push_back(checked_unit(std::move(x), line_no));
      ys.push_back(checked_unit(std::move(y), line_no));
    }
  }
  if (header_line == 0) throw ParseError("MissingColumn", line_no, "no header row");

  const Eigen::Index dim = format == PairsFormat::kLonLat ? 3 : static_cast<Eigen::Index>(xcols.size());
  kernels::PointMatrix x(dim, static_cast<Eigen::Index>(xs.size()));
  kernels::PointMatrix y(dim, static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = xs[i];
    y.col(static_cast<Eigen::Index>(i)) = ys[i];
  }
  return Dataset(std::move(x), std::move(y));
}

Dataset load_pairs_csv(const std::string& path, PairsFormat format) {
  return parse_pairs_csv(read_file(path), format);
}

void write_pairs_csv(std::ostream& out, const Dataset& data, const Prologue& prologue) {
  for (const auto& [key, value] : prologue) out << "# " << key << '=' << value << '\n';
  const int d = data.dim();
  for (int c = 1; c <= d; ++c) out << 'x' << c << ',';
  for (int c = 1; c <= d; ++c) out << 'y' << c << (c == d ? '\n' : ',');
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    for (int c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.x()(c, col));
      out << buf << ',';
    }
    for (int c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.y()(c, col));
      out << buf << (c + 1 == d ? '\n' : ',');
    }
  }
}

void write_pairs_csv(const std::string& path, const Dataset& data, const Prologue& prologue) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_pairs_csv(out, data, prologue);
}

} // namespace fmsos
