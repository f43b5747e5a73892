#pragma once

#include <string>
#include <vector>

namespace lnainfer {

/// One cell's fluorescence series. Times are in hours and strictly increasing.
struct CellSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
};

struct MultiCellDataset {
  std::vector<CellSeries> cells;

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
  // Throws InputError unless every cell has matching, finite, strictly
  // increasing times and at least `min_points` observations.
  void validate(std::size_t min_points = 1) const;
};

}  // namespace lnainfer
