#include "lnainfer/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

void MultiCellDataset::validate(std::size_t min_points) const {
  for (const auto& cell : cells) {
    if (cell.times.size() != cell.values.size()) {
      throw InputError("cell '" + cell.name + "' has mismatched time and value counts");
    }
    if (cell.times.size() < min_points) {
      throw InputError("cell '" + cell.name + "' has " + std::to_string(cell.times.size()) +
                       " observations, need at least " + std::to_string(min_points));
    }
    for (std::size_t k = 0; k < cell.times.size(); ++k) {
      if (!std::isfinite(cell.times[k]) || !std::isfinite(cell.values[k])) {
        throw InputError("cell '" + cell.name + "' has a non-finite entry at index " + std::to_string(k));
      }
      if (k > 0 && !(cell.times[k] > cell.times[k - 1])) {
        throw InputError("cell '" + cell.name + "' times are not strictly increasing at index " + std::to_string(k));
      }
    }
  }
}

TimeUnit time_unit_from_string(const std::string& s) {
  if (s == "hours") return TimeUnit::hours;
  if (s == "minutes") return TimeUnit::minutes;
  throw InputError("time_unit must be 'hours' or 'minutes', got '" + s + "'");
}

MultiCellDataset read_dataset_csv(std::istream& in, TimeUnit unit, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header[0]) != "time") {
    throw InputError(source + ": header must be 'time,<cell>,...'");
  }
  MultiCellDataset data;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name.empty()) throw InputError(source + ": empty cell name in header column " + std::to_string(c + 1));
    data.cells.push_back({name, {}, {}});
  }
  const double factor = unit == TimeUnit::minutes ? 1.0 / 60.0 : 1.0;

  std::size_t row = 1;
  bool have_previous = false;
  double previous = 0.0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() > header.size()) {
      throw InputError(source + ": row " + std::to_string(row) + " has more fields than the header");
    }
    double t = 0.0;
    if (!parse_double(trim(fields[0]), t)) {
      throw InputError(source + ": row " + std::to_string(row) + ", column 'time': non-numeric value '" + fields[0] + "'");
    }
    if (have_previous && !(t > previous)) {
      throw InputError(source + ": row " + std::to_string(row) + ", column 'time': time is not strictly increasing");
    }
    have_previous = true;
    previous = t;
    for (std::size_t c = 1; c < header.size(); ++c) {
      const std::string field = c < fields.size() ? trim(fields[c]) : std::string();
      if (field.empty()) continue;
      double v = 0.0;
      if (!parse_double(field, v)) {
        throw InputError(source + ": row " + std::to_string(row) + ", column '" + data.cells[c - 1].name +
                         "': non-numeric value '" + field + "'");
      }
      data.cells[c - 1].times.push_back(t * factor);
      data.cells[c - 1].values.push_back(v);
    }
  }
  for (const auto& cell : data.cells) {
    if (cell.times.size() < 3) {
      throw InputError(source + ": column '" + cell.name + "' has " + std::to_string(cell.times.size()) +
                       " observations, need at least 3");
    }
  }
  return data;
}

MultiCellDataset ingest(const std::filesystem::path& path, TimeUnit unit) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path.string() + "'");
  return read_dataset_csv(in, unit, path.string());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(std::ostream& out, const MultiCellDataset& data) {
  std::vector<double> grid;
  for (const auto& cell : data.cells) grid.insert(grid.end(), cell.times.begin(), cell.times.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  out << "time";
  for (const auto& cell : data.cells) out << ',' << cell.name;
  out << '\n';
  std::vector<std::size_t> cursor(data.cells.size(), 0);
  for (double t : grid) {
    out << format_double(t);
    for (std::size_t c = 0; c < data.cells.size(); ++c) {
      out << ',';
      const auto& cell = data.cells[c];
      if (cursor[c] < cell.times.size() && cell.times[cursor[c]] == t) {
        out << format_double(cell.values[cursor[c]]);
        ++cursor[c];
      }
    }
    out << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const MultiCellDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write_dataset_csv(out, data);
}

}  // namespace lnainfer
