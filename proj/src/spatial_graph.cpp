#include "nrd/spatial_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace nrd {

std::string_view to_string(SiteKind kind) {
  return kind == SiteKind::amenity ? "amenity" : "housing";
}

RoadGraph::RoadGraph(std::vector<Node> nodes, std::vector<Arc> arcs)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw GraphError("duplicate node id '" + nodes_[i].id + "'");
    }
  }
  for (const Arc& a : arcs_) {
    if (a.tail >= nodes_.size() || a.head >= nodes_.size()) {
      throw GraphError("arc references unknown node");
    }
    if (!std::isfinite(a.length_m) || a.length_m <= 0.0) {
      throw GraphError("non-positive length on arc " + nodes_[a.tail].id + " -> " +
                       nodes_[a.head].id);
    }
  }
}

std::size_t RoadGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw GraphError("unknown node '" + std::string(id) + "'");
  return it->second;
}

bool RoadGraph::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

SitePartition SitePartition::from_kinds(std::span<const SiteKind> kinds) {
  SitePartition p;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    (kinds[i] == SiteKind::amenity ? p.amenities : p.housing).push_back(i);
  }
  if (p.amenities.empty()) throw GraphError("empty amenity set");
  if (p.housing.empty()) throw GraphError("empty housing set");
  return p;
}

std::vector<SiteKind> SitePartition::kinds(std::size_t num_nodes) const {
  std::vector<SiteKind> out(num_nodes, SiteKind::housing);
  for (std::size_t f : amenities) out.at(f) = SiteKind::amenity;
  return out;
}

LoadedGraph parse_graph(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphError(std::string("parse failure: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("arcs") ||
      !doc["nodes"].is_array() || !doc["arcs"].is_array()) {
    throw GraphError("parse failure: expected top-level 'nodes' and 'arcs' arrays");
  }

  std::vector<Node> nodes;
  std::vector<SiteKind> kinds;
  std::unordered_map<std::string, std::size_t> index;
  try {
    for (const json& jn : doc["nodes"]) {
      Node n{jn.at("id").get<std::string>(), jn.at("lon").get<double>(),
             jn.at("lat").get<double>()};
      const auto kind = jn.at("kind").get<std::string>();
      if (kind == "amenity") {
        kinds.push_back(SiteKind::amenity);
      } else if (kind == "housing") {
        kinds.push_back(SiteKind::housing);
      } else {
        throw GraphError("parse failure: node '" + n.id + "' has unknown kind '" + kind + "'");
      }
      if (!index.emplace(n.id, nodes.size()).second) {
        throw GraphError("duplicate node id '" + n.id + "'");
      }
      nodes.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw GraphError(std::string("parse failure: ") + e.what());
  }

  std::vector<Arc> arcs;
  try {
    for (const json& ja : doc["arcs"]) {
      const auto tail = ja.at("tail").get<std::string>();
      const auto head = ja.at("head").get<std::string>();
      const auto t = index.find(tail);
      const auto h = index.find(head);
      if (t == index.end() || h == index.end()) {
        throw GraphError("arc references unknown node '" + (t == index.end() ? tail : head) + "'");
      }
      arcs.push_back({t->second, h->second, ja.at("length_m").get<double>()});
    }
  } catch (const json::exception& e) {
    throw GraphError(std::string("parse failure: ") + e.what());
  }

  RoadGraph graph(std::move(nodes), std::move(arcs));
  return {std::move(graph), SitePartition::from_kinds(kinds)};
}

LoadedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open graph file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

std::string dump_graph(const RoadGraph& graph, const SitePartition& sites) {
  using nlohmann::ordered_json;
  const auto kinds = sites.kinds(graph.num_nodes());
  ordered_json doc;
  ordered_json nodes = ordered_json::array();
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
    const Node& n = graph.nodes()[i];
    nodes.push_back({{"id", n.id}, {"lon", n.lon}, {"lat", n.lat}, {"kind", to_string(kinds[i])}});
  }
  ordered_json arcs = ordered_json::array();
  for (const Arc& a : graph.arcs()) {
    arcs.push_back({{"tail", graph.nodes()[a.tail].id},
                    {"head", graph.nodes()[a.head].id},
                    {"length_m", a.length_m}});
  }
  doc["nodes"] = std::move(nodes);
  doc["arcs"] = std::move(arcs);
  return doc.dump(1) + "\n";
}

std::vector<std::size_t> strongly_connected_components(const RoadGraph& graph) {
  // Iterative Tarjan.
  const std::size_t n = graph.num_nodes();
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();

  std::vector<std::vector<std::size_t>> out(n);
  for (const Arc& a : graph.arcs()) out[a.tail].push_back(a.head);

  std::vector<std::size_t> order(n, unset), low(n, 0), comp(n, unset), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next edge)
  std::size_t counter = 0, label = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (order[root] != unset) continue;
    call.emplace_back(root, 0);
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, e] = call.back();
      if (e < out[v].size()) {
        const std::size_t w = out[v][e++];
        if (order[w] == unset) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], order[w]);
        }
        continue;
      }
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == order[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = label;
        } while (w != done);
        ++label;
      }
    }
  }
  return comp;
}

LoadedGraph restrict_to_largest_scc(const RoadGraph& graph, const SitePartition& sites) {
  const std::size_t n = graph.num_nodes();
  if (n == 0) throw GraphError("empty graph");
  const auto comp = strongly_connected_components(graph);
  const std::size_t num_comp = *std::max_element(comp.begin(), comp.end()) + 1;

  std::vector<std::size_t> size(num_comp, 0);
  std::vector<const std::string*> smallest(num_comp, nullptr);
  for (std::size_t v = 0; v < n; ++v) {
    ++size[comp[v]];
    const std::string& id = graph.nodes()[v].id;
    if (!smallest[comp[v]] || id < *smallest[comp[v]]) smallest[comp[v]] = &id;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < num_comp; ++c) {
    if (size[c] > size[best] || (size[c] == size[best] && *smallest[c] < *smallest[best])) {
      best = c;
    }
  }

  std::vector<std::size_t> remap(n, n);
  std::vector<Node> nodes;
  std::vector<SiteKind> kinds;
  const auto old_kinds = sites.kinds(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (comp[v] != best) continue;
    remap[v] = nodes.size();
    nodes.push_back(graph.nodes()[v]);
    kinds.push_back(old_kinds[v]);
  }
  std::vector<Arc> arcs;
  for (const Arc& a : graph.arcs()) {
    if (remap[a.tail] < n && remap[a.head] < n) {
      arcs.push_back({remap[a.tail], remap[a.head], a.length_m});
    }
  }
  RoadGraph restricted(std::move(nodes), std::move(arcs));
  return {std::move(restricted), SitePartition::from_kinds(kinds)};
}

NormalizedDistances::NormalizedDistances(std::size_t n, std::vector<double> values,
                                         double diameter_m)
    : n_(n), values_(std::move(values)), diameter_m_(diameter_m) {
  if (values_.size() != n_ * n_) throw std::invalid_argument("distance matrix size mismatch");
}

std::vector<double> shortest_path_lengths(const RoadGraph& graph, std::size_t source) {
  const std::size_t n = graph.num_nodes();
  // CSR adjacency would be faster; at a few hundred nodes this is not the
  // bottleneck.
  std::vector<std::vector<std::pair<std::size_t, double>>> out(n);
  for (const Arc& a : graph.arcs()) out[a.tail].emplace_back(a.head, a.length_m);

  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const auto& [w, len] : out[v]) {
      const double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.emplace(nd, w);
      }
    }
  }
  return dist;
}

NormalizedDistances compute_normalized_distances(const RoadGraph& graph) {
  const std::size_t n = graph.num_nodes();
  std::vector<double> d;
  d.reserve(n * n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto row = shortest_path_lengths(graph, s);
    d.insert(d.end(), row.begin(), row.end());
  }
  double diam = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) {
      throw GraphError("unreachable pair " + graph.nodes()[i / n].id + " -> " +
                       graph.nodes()[i % n].id + " (graph not strongly connected)");
    }
    diam = std::max(diam, d[i]);
  }
  if (diam > 0.0) {
    for (double& x : d) x /= diam;
  }
  return {n, std::move(d), diam};
}

double amenity_score(std::size_t housing_node, std::span<const std::size_t> amenities,
                     const NormalizedDistances& ell) {
  if (amenities.empty()) throw std::invalid_argument("amenity set is empty");
  double nearest = 1.0;
  for (std::size_t f : amenities) nearest = std::min(nearest, ell(housing_node, f));
  return 1.0 - nearest;
}

Geography build_geography(const RoadGraph& graph, const SitePartition& sites) {
  auto [core, core_sites] = restrict_to_largest_scc(graph, sites);
  Geography geo;
  geo.ell = compute_normalized_distances(core);
  geo.graph = std::move(core);
  geo.sites = std::move(core_sites);

  const auto& housing = geo.sites.housing;
  const std::size_t nh = housing.size();
  geo.amenity_scores.resize(nh);
  for (std::size_t h = 0; h < nh; ++h) {
    geo.amenity_scores[h] = amenity_score(housing[h], geo.sites.amenities, geo.ell);
  }
  geo.proximity_sq.resize(nh * nh);
  for (std::size_t a = 0; a < nh; ++a) {
    for (std::size_t b = 0; b < nh; ++b) {
      const double s = 1.0 - geo.ell(housing[a], housing[b]);
      geo.proximity_sq[a * nh + b] = s * s;
    }
  }
  return geo;
}

}  // namespace nrd
