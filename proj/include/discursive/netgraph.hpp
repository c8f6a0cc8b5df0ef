#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "discursive/landscape.hpp"

namespace discursive::netgraph {

enum class NodeCategory { Country, Topic };

std::string_view to_string(NodeCategory category);

struct NodeRef {
  NodeCategory category;
  std::size_t index;
  bool operator==(const NodeRef&) const = default;
};

struct BipartiteEdge {
  std::size_t country;
  std::size_t topic;
  double weight;
  bool operator==(const BipartiteEdge&) const = default;
};

/// Affiliation x topic graph; edges sorted by (country, topic).
struct BipartiteGraph {
  std::vector<std::string> countries;
  std::vector<std::string> topics;
  std::vector<BipartiteEdge> edges;
};

/// One edge per positive weight.
BipartiteGraph build_bipartite(const landscape::SpeakerTopicWeights& weights);

struct FilteredView {
  double level = 1.0;
  bool isolates_removed = false;
  bool global_max = false;
  std::vector<std::string> countries;
  std::vector<std::string> topics;
  std::vector<bool> country_present;
  std::vector<bool> topic_present;
  std::vector<BipartiteEdge> edges;

  bool contains(NodeRef node) const;
  double strength(NodeRef node) const;
  std::optional<NodeRef> find(NodeCategory category, std::string_view name) const;
};

/// Keeps (c, t) iff w(c, t) >= level * max_c' w(c', t). With `global_max`
/// the maximum is taken over all edges instead of per topic.
FilteredView filter_edges(const BipartiteGraph& graph, double level, bool remove_isolates,
                          bool global_max = false);

enum class CentralityNorm { Max, Sum };

/// Node strength divided by the maximum (or sum) of strengths of the same
/// category in the view. Throws NodeNotInView.
double weighted_normalized_degree(const FilteredView& view, NodeRef node,
                                  CentralityNorm norm = CentralityNorm::Max);

/// Undirected weighted graph without self-loops; edges have a < b.
struct WeightedGraph {
  struct Edge {
    std::size_t a;
    std::size_t b;
    double weight;
    bool operator==(const Edge&) const = default;
  };
  std::vector<std::string> nodes;
  std::vector<Edge> edges;

  std::vector<double> strengths() const;
  double total_weight() const;
};

enum class ProjectionWeight { DotProduct, CoOccurrence, MinWeight };

/// Country-country graph over the view's present countries. With the default
/// dot product, W(c, c') = sum over shared topics of w(c, t) * w(c', t).
WeightedGraph project_one_mode(const FilteredView& view,
                               ProjectionWeight weighting = ProjectionWeight::DotProduct);

/// The view itself as a general graph: present countries, then present topics.
WeightedGraph view_as_graph(const FilteredView& view);

struct CommunityAssignment {
  double resolution = 1.0;
  std::vector<int> community;
  int count = 0;
  double modularity = 0.0;
};

/// Internal modularity weight for a user-facing resolution: gamma = 1 / rho,
/// so that lower rho yields more communities.
double gamma_for_resolution(double resolution);

/// Q = (1/2m) sum_ij [A_ij - gamma s_i s_j / 2m] delta(c_i, c_j); 0 when the
/// graph has no edges. Throws PartitionIncomplete.
double modularity(const WeightedGraph& graph, std::span<const int> partition, double resolution);

/// Seeded Louvain runs per call; the partition with the highest Q is kept.
inline constexpr int kLouvainRestarts = 20;

/// Louvain local moving plus aggregation, followed by single-node refinement
/// on the original graph. Node visit order is reshuffled with the seeded RNG
/// on every pass. Community ids are contiguous, numbered by first appearance.
/// Throws EmptyGraph.
CommunityAssignment louvain_communities(const WeightedGraph& graph, double resolution,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Export

struct BundleNode {
  std::string id;
  std::string category;
  double strength = 0.0;
  double centrality = 0.0;
  int community = 0;
  bool operator==(const BundleNode&) const = default;
};

struct BundleEdge {
  std::string source;
  std::string target;
  double weight = 0.0;
  bool operator==(const BundleEdge&) const = default;
};

struct GraphMeta {
  std::string kind;  // "bipartite" or "projection"
  double level = 0.0;
  double resolution = 1.0;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  bool isolates_removed = false;
  bool global_max = false;
  std::string normalization = "max";
  double modularity = 0.0;
  int communities = 0;
  bool operator==(const GraphMeta&) const = default;
};

struct GraphBundle {
  std::vector<BundleNode> nodes;
  std::vector<BundleEdge> edges;
  GraphMeta meta;
  bool operator==(const GraphBundle&) const = default;
};

GraphBundle make_bipartite_bundle(const FilteredView& view, double resolution, std::uint64_t seed,
                                  CentralityNorm norm = CentralityNorm::Max);
GraphBundle make_projection_bundle(const FilteredView& view, const WeightedGraph& projection,
                                   double resolution, std::uint64_t seed,
                                   CentralityNorm norm = CentralityNorm::Max);

enum class GraphFormat { Gexf, Json, Csv };

/// Throws UnsupportedFormat for anything but "gexf", "json" or "csv".
GraphFormat parse_format(std::string_view name);

std::string export_graph(const GraphBundle& bundle, GraphFormat format);
void export_graph(const GraphBundle& bundle, GraphFormat format, const std::filesystem::path& path);
GraphBundle import_graph_json(std::string_view text);

}  // namespace discursive::netgraph
