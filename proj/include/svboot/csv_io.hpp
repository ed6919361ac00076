#pragma once

#include <iosfwd>
#include <string>

#include "svboot/spatial.hpp"

namespace sv {

/// Read point data from CSV with header `x,y,z`, one point per row.
/// Throws csv_parse_error naming the offending 1-based line on bad input.
SpatialDataset read_points_csv(std::istream& is);
SpatialDataset read_points_csv_file(const std::string& path);

/// Write a dataset back out in the same format (used by the simulators and
/// tests to produce inputs for the CLI).
void write_points_csv(std::ostream& os, const SpatialDataset& data);

}  // namespace sv
