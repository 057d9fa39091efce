#include "umfloc/csv.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "umfloc/error.hpp"

namespace umfloc {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, std::size_t line) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(ErrorKind::Io, "csv: line " + std::to_string(line) + ": not a number: '" + t + "'");
  return value;
}

std::vector<std::vector<double>> read_rows(std::istream& in, bool has_header, std::size_t number) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    ++number;
    if (has_header && number == 1) continue;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(parse_double(field, number));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<std::vector<double>> read_numeric_csv(std::istream& in, bool has_header) {
  return read_rows(in, has_header, 0);
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "csv: cannot open " + path);
  return read_numeric_csv(in, has_header);
}

void write_measurements(std::ostream& out, const MeasurementSet& ms) {
  out << "x_km,y_km,energy\n" << std::setprecision(17);
  for (std::size_t m = 0; m < ms.size(); ++m)
    out << ms.locations[m].x() << ',' << ms.locations[m].y() << ',' << ms.energies[m] << '\n';
}

void write_measurements(const std::string& path, const MeasurementSet& ms) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "csv: cannot open " + path);
  write_measurements(out, ms);
}

MeasurementSet read_measurements(std::istream& in) {
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), ErrorKind::Io, "csv: empty measurement file");
  require(trim(header) == "x_km,y_km,energy", ErrorKind::Io,
          "csv: expected header 'x_km,y_km,energy', got '" + trim(header) + "'");
  MeasurementSet ms;
  for (const auto& row : read_rows(in, false, 1)) {
    require(row.size() == 3, ErrorKind::Io, "csv: measurement rows need exactly three fields");
    ms.locations.emplace_back(row[0], row[1]);
    ms.energies.push_back(row[2]);
  }
  return ms;
}

MeasurementSet read_measurements(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "csv: cannot open " + path);
  return read_measurements(in);
}

}  // namespace umfloc
