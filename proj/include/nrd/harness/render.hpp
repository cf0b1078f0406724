// render.hpp - static SVG map of one snapshot.
//
// Edges gray; amenities solid blue at a fixed radius; housing radius linear
// in expected population (normalized by the snapshot maximum) and fill on a
// yellow -> orange -> red ramp over expected mean endowment, min-max
// normalized across populated housing sites. Unpopulated sites get the
// minimum radius and a neutral gray fill.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nrd/harness/snapshot.hpp"
#include "nrd/spatial_graph.hpp"

namespace nrd::harness {

inline constexpr const char* kAmenityFill = "#0000ff";
inline constexpr const char* kUnpopulatedFill = "#bdbdbd";
inline constexpr const char* kEdgeStroke = "#9e9e9e";

// t in [0,1]; 0 -> yellow, 0.5 -> orange, 1 -> red.
std::array<std::uint8_t, 3> endowment_ramp(double t);
std::string hex_color(const std::array<std::uint8_t, 3>& rgb);

std::string render_svg(const std::vector<SiteSnapshot>& rows, const RoadGraph& graph);

}  // namespace nrd::harness
