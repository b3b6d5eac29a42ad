#pragma once

// Deterministic SVG rendering of datasets: line plots for 1-D kinds, a fan
// plot for spectra, and a heatmap for SU(2) maps.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qdsim/dataset.hpp"

namespace qdsim::plot {

struct GridPeak {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Local maxima of a row-major grid: each peak is >= every in-grid
/// 8-neighbour and above `rel_threshold` of the global maximum. Peaks closer
/// than two cells to a higher one are dropped. NaN cells are ignored.
std::vector<GridPeak> find_grid_maxima(std::size_t rows, std::size_t cols, std::span<const double> values,
                                       double rel_threshold = 0.5);

/// Throws DomainError for empty datasets and for layouts the kind does not support.
std::string render_svg(const io::Dataset& ds);

}  // namespace qdsim::plot
