#include "discursive/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "discursive/error.hpp"

namespace discursive::netgraph {

std::string_view to_string(NodeCategory category) {
  return category == NodeCategory::Country ? "country" : "topic";
}

BipartiteGraph build_bipartite(const landscape::SpeakerTopicWeights& weights) {
  BipartiteGraph graph;
  graph.countries = weights.affiliations;
  for (std::size_t t = 0; t < weights.num_topics; ++t) {
    graph.topics.push_back(landscape::topic_label(t));
  }
  for (std::size_t c = 0; c < weights.affiliations.size(); ++c) {
    for (std::size_t t = 0; t < weights.num_topics; ++t) {
      const double w = weights.weight[c][t];
      if (w > 0.0) graph.edges.push_back({c, t, w});
    }
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Filtered view

bool FilteredView::contains(NodeRef node) const {
  if (node.category == NodeCategory::Country) {
    return node.index < country_present.size() && country_present[node.index];
  }
  return node.index < topic_present.size() && topic_present[node.index];
}

double FilteredView::strength(NodeRef node) const {
  double total = 0.0;
  for (const auto& edge : edges) {
    const std::size_t endpoint = node.category == NodeCategory::Country ? edge.country : edge.topic;
    if (endpoint == node.index) total += edge.weight;
  }
  return total;
}

std::optional<NodeRef> FilteredView::find(NodeCategory category, std::string_view name) const {
  const auto& names = category == NodeCategory::Country ? countries : topics;
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  NodeRef ref{category, static_cast<std::size_t>(it - names.begin())};
  if (!contains(ref)) return std::nullopt;
  return ref;
}

FilteredView filter_edges(const BipartiteGraph& graph, double level, bool remove_isolates,
                          bool global_max) {
  if (!(level > 0.0) || level > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "level must be in (0, 1]");
  }
  std::vector<double> topic_max(graph.topics.size(), 0.0);
  double overall_max = 0.0;
  for (const auto& edge : graph.edges) {
    topic_max[edge.topic] = std::max(topic_max[edge.topic], edge.weight);
    overall_max = std::max(overall_max, edge.weight);
  }

  FilteredView view;
  view.level = level;
  view.isolates_removed = remove_isolates;
  view.global_max = global_max;
  view.countries = graph.countries;
  view.topics = graph.topics;
  for (const auto& edge : graph.edges) {
    const double reference = global_max ? overall_max : topic_max[edge.topic];
    if (edge.weight >= level * reference) view.edges.push_back(edge);
  }

  view.country_present.assign(graph.countries.size(), !remove_isolates);
  view.topic_present.assign(graph.topics.size(), !remove_isolates);
  for (const auto& edge : view.edges) {
    view.country_present[edge.country] = true;
    view.topic_present[edge.topic] = true;
  }
  return view;
}

double weighted_normalized_degree(const FilteredView& view, NodeRef node, CentralityNorm norm) {
  if (!view.contains(node)) {
    throw Error(ErrorCode::NodeNotInView, std::string(to_string(node.category)) + " #" +
                                              std::to_string(node.index));
  }
  const auto& present =
      node.category == NodeCategory::Country ? view.country_present : view.topic_present;
  double reference = 0.0;
  for (std::size_t i = 0; i < present.size(); ++i) {
    if (!present[i]) continue;
    const double s = view.strength({node.category, i});
    reference = norm == CentralityNorm::Max ? std::max(reference, s) : reference + s;
  }
  if (reference <= 0.0) return 0.0;
  return view.strength(node) / reference;
}

// ---------------------------------------------------------------------------
// Projection

std::vector<double> WeightedGraph::strengths() const {
  std::vector<double> s(nodes.size(), 0.0);
  for (const auto& edge : edges) {
    s[edge.a] += edge.weight;
    s[edge.b] += edge.weight;
  }
  return s;
}

double WeightedGraph::total_weight() const {
  double m = 0.0;
  for (const auto& edge : edges) m += edge.weight;
  return m;
}

WeightedGraph project_one_mode(const FilteredView& view, ProjectionWeight weighting) {
  WeightedGraph graph;
  std::vector<std::ptrdiff_t> node_of(view.countries.size(), -1);
  for (std::size_t c = 0; c < view.countries.size(); ++c) {
    if (!view.country_present[c]) continue;
    node_of[c] = static_cast<std::ptrdiff_t>(graph.nodes.size());
    graph.nodes.push_back(view.countries[c]);
  }
  // topic -> (node, weight) of surviving edges
  std::vector<std::vector<std::pair<std::size_t, double>>> members(view.topics.size());
  for (const auto& edge : view.edges) {
    members[edge.topic].emplace_back(static_cast<std::size_t>(node_of[edge.country]), edge.weight);
  }
  std::map<std::pair<std::size_t, std::size_t>, double> pair_weight;
  for (const auto& topic_members : members) {
    for (std::size_t i = 0; i < topic_members.size(); ++i) {
      for (std::size_t j = i + 1; j < topic_members.size(); ++j) {
        auto [a, wa] = topic_members[i];
        auto [b, wb] = topic_members[j];
        if (a > b) std::swap(a, b);
        double contribution = 0.0;
        switch (weighting) {
          case ProjectionWeight::DotProduct: contribution = wa * wb; break;
          case ProjectionWeight::CoOccurrence: contribution = 1.0; break;
          case ProjectionWeight::MinWeight: contribution = std::min(wa, wb); break;
        }
        pair_weight[{a, b}] += contribution;
      }
    }
  }
  for (const auto& [key, weight] : pair_weight) {
    if (weight > 0.0) graph.edges.push_back({key.first, key.second, weight});
  }
  return graph;
}

WeightedGraph view_as_graph(const FilteredView& view) {
  WeightedGraph graph;
  std::vector<std::size_t> country_node(view.countries.size());
  std::vector<std::size_t> topic_node(view.topics.size());
  for (std::size_t c = 0; c < view.countries.size(); ++c) {
    if (!view.country_present[c]) continue;
    country_node[c] = graph.nodes.size();
    graph.nodes.push_back(view.countries[c]);
  }
  for (std::size_t t = 0; t < view.topics.size(); ++t) {
    if (!view.topic_present[t]) continue;
    topic_node[t] = graph.nodes.size();
    graph.nodes.push_back(view.topics[t]);
  }
  for (const auto& edge : view.edges) {
    auto a = country_node[edge.country];
    auto b = topic_node[edge.topic];
    graph.edges.push_back({std::min(a, b), std::max(a, b), edge.weight});
  }
  return graph;
}

}  // namespace discursive::netgraph
