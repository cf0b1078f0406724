// spatial_graph.hpp
//
// Road network loading, strongly connected restriction, and the
// diameter-normalized distance matrix every score function reads from.
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nrd {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SiteKind { amenity, housing };

std::string_view to_string(SiteKind kind);

struct Node {
  std::string id;
  double lon = 0.0;
  double lat = 0.0;
};

// Arc endpoints are indices into RoadGraph::nodes().
struct Arc {
  std::size_t tail = 0;
  std::size_t head = 0;
  double length_m = 0.0;
};

// Directed street graph with arc lengths in meters. Node ids are unique and
// every arc references declared nodes with a strictly positive finite length.
class RoadGraph {
 public:
  RoadGraph() = default;

  // Throws GraphError on any invariant violation.
  RoadGraph(std::vector<Node> nodes, std::vector<Arc> arcs);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  // Index of the node with this id; throws GraphError when absent.
  std::size_t index_of(std::string_view id) const;
  bool contains(std::string_view id) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Amenity sites F and housing sites H as sorted node indices. Disjoint, and
// together they cover every node of the graph they were built against.
struct SitePartition {
  std::vector<std::size_t> amenities;
  std::vector<std::size_t> housing;

  static SitePartition from_kinds(std::span<const SiteKind> kinds);
  std::vector<SiteKind> kinds(std::size_t num_nodes) const;
};

struct LoadedGraph {
  RoadGraph graph;
  SitePartition sites;
};

// Parses the JSON graph document ({nodes:[{id,lon,lat,kind}], arcs:[{tail,
// head,length_m}]}).
LoadedGraph parse_graph(std::string_view text);
LoadedGraph load_graph(const std::filesystem::path& path);

// Serializes back to the same document shape. Node and arc order preserved.
std::string dump_graph(const RoadGraph& graph, const SitePartition& sites);

// Keeps only the largest strongly connected component. Equal-size components
// are ordered by their lexicographically smallest node id. Node order within
// the kept component follows the input order.
LoadedGraph restrict_to_largest_scc(const RoadGraph& graph, const SitePartition& sites);

// Component label per node, labels numbered in discovery order.
std::vector<std::size_t> strongly_connected_components(const RoadGraph& graph);

// Dense row-major matrix of d(u,v) / diam, diam = max over ordered pairs.
class NormalizedDistances {
 public:
  NormalizedDistances() = default;
  NormalizedDistances(std::size_t n, std::vector<double> values, double diameter_m);

  std::size_t size() const { return n_; }
  double operator()(std::size_t from, std::size_t to) const { return values_[from * n_ + to]; }
  std::span<const double> row(std::size_t from) const { return {values_.data() + from * n_, n_}; }
  double diameter_m() const { return diameter_m_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  double diameter_m_ = 0.0;
};

// Shortest-path lengths in meters from one source (Dijkstra, binary heap).
std::vector<double> shortest_path_lengths(const RoadGraph& graph, std::size_t source);

// Throws GraphError if some ordered pair is unreachable.
NormalizedDistances compute_normalized_distances(const RoadGraph& graph);

// 1 - min over amenities of ell(h, f).
double amenity_score(std::size_t housing_node, std::span<const std::size_t> amenities,
                     const NormalizedDistances& ell);

// Everything the cost model needs about the geography, indexed by housing
// site position 0..|H|-1 (the order of SitePartition::housing).
struct Geography {
  RoadGraph graph;
  SitePartition sites;
  NormalizedDistances ell;
  std::vector<double> amenity_scores;  // per housing site
  std::vector<double> proximity_sq;    // |H| x |H|, (1 - ell(h, h'))^2

  std::size_t num_housing() const { return sites.housing.size(); }
  const Node& housing_node(std::size_t h) const { return graph.nodes()[sites.housing[h]]; }
};

// Restricts to the largest SCC, then precomputes distances and score tables.
Geography build_geography(const RoadGraph& graph, const SitePartition& sites);

}  // namespace nrd
