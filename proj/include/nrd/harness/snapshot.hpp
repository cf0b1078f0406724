// snapshot.hpp - per-site expected statistics of the time-averaged outcome
// distribution at one checkpoint, plus their CSV and GeoJSON encodings.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nrd/engine.hpp"
#include "nrd/spatial_graph.hpp"

namespace nrd::harness {

// Sites whose expected population falls below this are reported unpopulated.
inline constexpr double kPopulatedThreshold = 1e-9;

struct SiteSnapshot {
  std::string site_id;
  double lon = 0.0;
  double lat = 0.0;
  SiteKind kind = SiteKind::housing;
  double amenity_score = 0.0;
  double exp_pop = 0.0;
  double exp_total_endow = 0.0;
  double exp_mean_endow = 0.0;  // exp_total_endow / exp_pop, 0 when unpopulated
  bool populated = false;

  bool operator==(const SiteSnapshot&) const = default;
};

// One row per node (amenities included with zero population), sorted by id.
std::vector<SiteSnapshot> snapshot(const CheckpointFrame& frame, const Geography& geo);

std::string to_csv(const std::vector<SiteSnapshot>& rows);
std::vector<SiteSnapshot> parse_csv(std::string_view text);
std::string to_geojson(const std::vector<SiteSnapshot>& rows);

}  // namespace nrd::harness
