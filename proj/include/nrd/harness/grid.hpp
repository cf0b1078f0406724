// grid.hpp - synthetic bidirectional unit-length grid instances.
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "nrd/spatial_graph.hpp"

namespace nrd::harness {

struct GridCell {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const GridCell&) const = default;
};

struct GridDims {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// "RxC", e.g. "12x12".
GridDims parse_grid_dims(std::string_view text);

// "center" or a ';'-separated list of "row,col" pairs. The center of an even
// dimension rounds half up, so a 6x6 grid centers on (3,3).
std::vector<GridCell> parse_amenity_spec(std::string_view text, GridDims dims);

// Node ids are "r<row>c<col>" zero padded so lexicographic order is row-major.
std::string grid_node_id(GridDims dims, GridCell cell);

// Throws std::invalid_argument for dims below 2x2, out-of-range amenities, or
// amenities covering every cell.
LoadedGraph generate_grid(GridDims dims, const std::vector<GridCell>& amenities);

}  // namespace nrd::harness
