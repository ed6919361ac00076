#include "svboot/csv_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "svboot/errors.hpp"

namespace sv {

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
    ++a;
  }
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
    --b;
  }
  return s.substr(a, b - a);
}

double parse_field(const std::string& field, std::size_t line_no,
                   const char* what) {
  const std::string t = strip(field);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (t.empty() || pos != t.size()) {
    throw csv_parse_error("line " + std::to_string(line_no) + ": cannot parse " +
                              what + " value '" + field + "'",
                          line_no);
  }
  return v;
}

}  // namespace

SpatialDataset read_points_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw csv_parse_error("line 1: empty input, expected header x,y,z", 1);
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (strip(line) != "x,y,z") {
    throw csv_parse_error("line 1: expected header 'x,y,z', got '" + line + "'",
                          1);
  }

  std::vector<Point> coords;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (strip(line).empty()) {
      continue;
    }
    std::istringstream ss(line);
    std::string fx, fy, fz, extra;
    if (!std::getline(ss, fx, ',') || !std::getline(ss, fy, ',') ||
        !std::getline(ss, fz, ',')) {
      throw csv_parse_error(
          "line " + std::to_string(line_no) + ": expected 3 fields x,y,z",
          line_no);
    }
    if (std::getline(ss, extra, ',')) {
      throw csv_parse_error("line " + std::to_string(line_no) +
                                ": too many fields, expected x,y,z",
                            line_no);
    }
    coords.push_back(
        {parse_field(fx, line_no, "x"), parse_field(fy, line_no, "y")});
    values.push_back(parse_field(fz, line_no, "z"));
  }

  if (coords.size() < 2) {
    throw csv_parse_error("line " + std::to_string(line_no) +
                              ": need at least 2 data rows",
                          line_no);
  }
  return SpatialDataset(std::move(coords), std::move(values));
}

SpatialDataset read_points_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw error("cannot open input file: " + path);
  }
  return read_points_csv(f);
}

void write_points_csv(std::ostream& os, const SpatialDataset& data) {
  os << "x,y,z\n";
  char buf[200];
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", data.coords()[i].x,
                  data.coords()[i].y, data.values()[i]);
    os << buf;
  }
}

}  // namespace sv
