#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "lnainfer/dataset.hpp"

namespace lnainfer {

enum class TimeUnit { hours, minutes };

TimeUnit time_unit_from_string(const std::string& s);

/// Reads a `time,cell_1,...,cell_N` CSV. Empty fields are missing values and
/// drop that (cell, time) point. Times are converted to hours.
MultiCellDataset read_dataset_csv(std::istream& in, TimeUnit unit = TimeUnit::hours,
                                  const std::string& source = "<stream>");
MultiCellDataset ingest(const std::filesystem::path& path, TimeUnit unit = TimeUnit::hours);

/// Writes the union of all cell time grids, one column per cell, with empty
/// fields where a cell has no value. Values carry 17 significant digits.
void write_dataset_csv(std::ostream& out, const MultiCellDataset& data);
void write_dataset_csv(const std::filesystem::path& path, const MultiCellDataset& data);

/// %.17g formatting, shared by every writer.
std::string format_double(double v);

}  // namespace lnainfer
