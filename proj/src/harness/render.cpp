#include "nrd/harness/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <utility>

namespace nrd::harness {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 800.0;
constexpr double kMargin = 24.0;
constexpr double kMinRadius = 1.5;
constexpr double kMaxRadius = 9.0;
constexpr double kAmenityRadius = 6.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::array<std::uint8_t, 3> endowment_ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // Green channel falls 255 -> 165 -> 0; red stays saturated.
  const double g = t <= 0.5 ? 255.0 + (165.0 - 255.0) * (t / 0.5) : 165.0 * (1.0 - (t - 0.5) / 0.5);
  return {255, static_cast<std::uint8_t>(std::lround(g)), 0};
}

std::string hex_color(const std::array<std::uint8_t, 3>& rgb) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string render_svg(const std::vector<SiteSnapshot>& rows, const RoadGraph& graph) {
  double min_lon = std::numeric_limits<double>::infinity(), max_lon = -min_lon;
  double min_lat = min_lon, max_lat = -min_lon;
  for (const Node& n : graph.nodes()) {
    min_lon = std::min(min_lon, n.lon);
    max_lon = std::max(max_lon, n.lon);
    min_lat = std::min(min_lat, n.lat);
    max_lat = std::max(max_lat, n.lat);
  }
  const double span = std::max({max_lon - min_lon, max_lat - min_lat, 1e-12});
  const double scale = (std::min(kWidth, kHeight) - 2 * kMargin) / span;
  auto px = [&](double lon) { return kMargin + (lon - min_lon) * scale; };
  auto py = [&](double lat) { return kHeight - kMargin - (lat - min_lat) * scale; };

  double max_pop = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows) {
    if (r.kind != SiteKind::housing) continue;
    max_pop = std::max(max_pop, r.exp_pop);
    if (r.populated) {
      lo = std::min(lo, r.exp_mean_endow);
      hi = std::max(hi, r.exp_mean_endow);
    }
  }

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  svg += "<g stroke=\"" + std::string(kEdgeStroke) + "\" stroke-width=\"1\">\n";
  std::set<std::pair<std::size_t, std::size_t>> drawn;
  for (const Arc& a : graph.arcs()) {
    const auto key = std::minmax(a.tail, a.head);
    if (a.tail == a.head || !drawn.insert(key).second) continue;
    const Node& u = graph.nodes()[a.tail];
    const Node& v = graph.nodes()[a.head];
    svg += "<line x1=\"" + fmt(px(u.lon)) + "\" y1=\"" + fmt(py(u.lat)) + "\" x2=\"" +
           fmt(px(v.lon)) + "\" y2=\"" + fmt(py(v.lat)) + "\"/>\n";
  }
  svg += "</g>\n";

  svg += "<g stroke=\"#616161\" stroke-width=\"0.5\">\n";
  for (const auto& r : rows) {
    if (r.kind != SiteKind::housing) continue;
    double radius = kMinRadius;
    std::string fill = kUnpopulatedFill;
    if (r.populated) {
      if (max_pop > 0.0) radius = kMinRadius + (kMaxRadius - kMinRadius) * (r.exp_pop / max_pop);
      const double t = hi > lo ? (r.exp_mean_endow - lo) / (hi - lo) : 0.5;
      fill = hex_color(endowment_ramp(t));
    }
    svg += "<circle cx=\"" + fmt(px(r.lon)) + "\" cy=\"" + fmt(py(r.lat)) + "\" r=\"" + fmt(radius) +
           "\" fill=\"" + fill + "\"><title>" + r.site_id + "</title></circle>\n";
  }
  svg += "</g>\n";

  svg += "<g>\n";
  for (const auto& r : rows) {
    if (r.kind != SiteKind::amenity) continue;
    svg += "<circle cx=\"" + fmt(px(r.lon)) + "\" cy=\"" + fmt(py(r.lat)) + "\" r=\"" +
           fmt(kAmenityRadius) + "\" fill=\"" + kAmenityFill + "\"><title>" + r.site_id +
           "</title></circle>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace nrd::harness
