#include "nrd/harness/snapshot.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include <json.hpp>

namespace nrd::harness {

namespace {

constexpr std::string_view kHeader =
    "site_id,lon,lat,kind,amenity_score,exp_pop,exp_total_endow,exp_mean_endow,populated_flag";

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

double parse_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("snapshot csv: bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<SiteSnapshot> snapshot(const CheckpointFrame& frame, const Geography& geo) {
  if (frame.step == 0) throw std::invalid_argument("snapshot of an empty frame");
  const double t = static_cast<double>(frame.step);
  const auto& nodes = geo.graph.nodes();

  std::vector<SiteSnapshot> rows;
  rows.reserve(nodes.size());
  for (std::size_t f : geo.sites.amenities) {
    rows.push_back({nodes[f].id, nodes[f].lon, nodes[f].lat, SiteKind::amenity,
                    amenity_score(f, geo.sites.amenities, geo.ell), 0.0, 0.0, 0.0, false});
  }
  for (std::size_t h = 0; h < geo.num_housing(); ++h) {
    const Node& n = geo.housing_node(h);
    SiteSnapshot s{n.id, n.lon, n.lat, SiteKind::housing, geo.amenity_scores[h]};
    s.exp_pop = frame.pop_acc[h] / t;
    s.exp_total_endow = frame.wealth_acc[h] / t;
    s.populated = s.exp_pop >= kPopulatedThreshold;
    s.exp_mean_endow = s.populated ? frame.wealth_acc[h] / frame.pop_acc[h] : 0.0;
    rows.push_back(std::move(s));
  }
  std::sort(rows.begin(), rows.end(),
            [](const SiteSnapshot& a, const SiteSnapshot& b) { return a.site_id < b.site_id; });
  return rows;
}

std::string to_csv(const std::vector<SiteSnapshot>& rows) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.site_id;
    for (double v : {r.lon, r.lat}) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    out += to_string(r.kind);
    for (double v : {r.amenity_score, r.exp_pop, r.exp_total_endow, r.exp_mean_endow}) {
      out += ',';
      append_number(out, v);
    }
    out += r.populated ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<SiteSnapshot> parse_csv(std::string_view text) {
  std::vector<SiteSnapshot> rows;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kHeader) throw std::runtime_error("snapshot csv: unexpected header");
      header = false;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (f.size() != 9) throw std::runtime_error("snapshot csv: expected 9 columns");
    SiteSnapshot s;
    s.site_id = std::string(f[0]);
    s.lon = parse_number(f[1]);
    s.lat = parse_number(f[2]);
    if (f[3] == "amenity") {
      s.kind = SiteKind::amenity;
    } else if (f[3] == "housing") {
      s.kind = SiteKind::housing;
    } else {
      throw std::runtime_error("snapshot csv: bad kind '" + std::string(f[3]) + "'");
    }
    s.amenity_score = parse_number(f[4]);
    s.exp_pop = parse_number(f[5]);
    s.exp_total_endow = parse_number(f[6]);
    s.exp_mean_endow = parse_number(f[7]);
    if (f[8] != "0" && f[8] != "1") throw std::runtime_error("snapshot csv: bad populated_flag");
    s.populated = f[8] == "1";
    rows.push_back(std::move(s));
  }
  if (header) throw std::runtime_error("snapshot csv: missing header");
  return rows;
}

std::string to_geojson(const std::vector<SiteSnapshot>& rows) {
  using nlohmann::ordered_json;
  ordered_json features = ordered_json::array();
  for (const auto& r : rows) {
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {r.lon, r.lat}}}},
                        {"properties",
                         {{"site_id", r.site_id},
                          {"lon", r.lon},
                          {"lat", r.lat},
                          {"kind", to_string(r.kind)},
                          {"amenity_score", r.amenity_score},
                          {"exp_pop", r.exp_pop},
                          {"exp_total_endow", r.exp_total_endow},
                          {"exp_mean_endow", r.exp_mean_endow},
                          {"populated_flag", r.populated ? 1 : 0}}}});
  }
  ordered_json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump(1) + "\n";
}

}  // namespace nrd::harness
