#include "nrd/harness/grid.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <string>

namespace nrd::harness {

namespace {

std::size_t parse_count(std::string_view s, const char* what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument(std::string("invalid ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

GridDims parse_grid_dims(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) {
    throw std::invalid_argument("grid dims must look like RxC, got '" + std::string(text) + "'");
  }
  return {parse_count(text.substr(0, x), "grid rows"), parse_count(text.substr(x + 1), "grid cols")};
}

std::vector<GridCell> parse_amenity_spec(std::string_view text, GridDims dims) {
  if (text == "center") return {{dims.rows / 2, dims.cols / 2}};
  std::vector<GridCell> cells;
  while (!text.empty()) {
    const auto semi = text.find(';');
    const auto item = text.substr(0, semi);
    const auto comma = item.find(',');
    if (comma == std::string_view::npos) {
      throw std::invalid_argument("amenity must be 'row,col', got '" + std::string(item) + "'");
    }
    cells.push_back({parse_count(item.substr(0, comma), "amenity row"),
                     parse_count(item.substr(comma + 1), "amenity col")});
    if (semi == std::string_view::npos) break;
    text.remove_prefix(semi + 1);
  }
  if (cells.empty()) throw std::invalid_argument("empty amenity spec");
  return cells;
}

std::string grid_node_id(GridDims dims, GridCell cell) {
  const std::size_t largest = std::max(dims.rows, dims.cols) - 1;
  const std::size_t width = std::max<std::size_t>(2, std::to_string(largest).size());
  auto pad = [width](std::size_t v) {
    std::string s = std::to_string(v);
    return std::string(width - std::min(width, s.size()), '0') + s;
  };
  return "r" + pad(cell.row) + "c" + pad(cell.col);
}

LoadedGraph generate_grid(GridDims dims, const std::vector<GridCell>& amenities) {
  if (dims.rows < 2 || dims.cols < 2) throw std::invalid_argument("grid needs at least 2x2 cells");
  std::vector<SiteKind> kinds(dims.rows * dims.cols, SiteKind::housing);
  for (const GridCell& c : amenities) {
    if (c.row >= dims.rows || c.col >= dims.cols) {
      throw std::invalid_argument("amenity (" + std::to_string(c.row) + "," +
                                  std::to_string(c.col) + ") outside the grid");
    }
    kinds[c.row * dims.cols + c.col] = SiteKind::amenity;
  }
  if (std::none_of(kinds.begin(), kinds.end(), [](SiteKind k) { return k == SiteKind::housing; })) {
    throw std::invalid_argument("every grid cell is an amenity; no housing sites remain");
  }

  std::vector<Node> nodes;
  for (std::size_t r = 0; r < dims.rows; ++r) {
    for (std::size_t c = 0; c < dims.cols; ++c) {
      nodes.push_back({grid_node_id(dims, {r, c}), 0.001 * static_cast<double>(c),
                       0.001 * static_cast<double>(dims.rows - 1 - r)});
    }
  }
  std::vector<Arc> arcs;
  for (std::size_t r = 0; r < dims.rows; ++r) {
    for (std::size_t c = 0; c < dims.cols; ++c) {
      const std::size_t v = r * dims.cols + c;
      if (c + 1 < dims.cols) {
        arcs.push_back({v, v + 1, 1.0});
        arcs.push_back({v + 1, v, 1.0});
      }
      if (r + 1 < dims.rows) {
        arcs.push_back({v, v + dims.cols, 1.0});
        arcs.push_back({v + dims.cols, v, 1.0});
      }
    }
  }
  RoadGraph g(std::move(nodes), std::move(arcs));
  return {std::move(g), SitePartition::from_kinds(kinds)};
}

}  // namespace nrd::harness
