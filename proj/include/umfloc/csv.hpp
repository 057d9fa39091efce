#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "umfloc/field.hpp"

namespace umfloc {

/// Rows of comma-separated numbers; the first line is skipped when `has_header`.
std::vector<std::vector<double>> read_numeric_csv(std::istream& in, bool has_header);
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, bool has_header);

/// `x_km,y_km,energy` per line.
void write_measurements(std::ostream& out, const MeasurementSet& ms);
void write_measurements(const std::string& path, const MeasurementSet& ms);
MeasurementSet read_measurements(std::istream& in);
MeasurementSet read_measurements(const std::string& path);

}  // namespace umfloc
