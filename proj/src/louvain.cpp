#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "discursive/error.hpp"
#include "discursive/netgraph.hpp"

namespace discursive::netgraph {

namespace {

constexpr double kGainEpsilon = 1e-12;

// Symmetric adjacency of one aggregation level. `self_loop[i]` is A_ii, which
// for an aggregated node equals the summed internal weight counted twice.
struct Level {
  std::size_t size = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> neighbours;
  std::vector<double> self_loop;
  std::vector<double> strength;
};

Level level_from_graph(const WeightedGraph& graph) {
  Level level;
  level.size = graph.nodes.size();
  level.neighbours.resize(level.size);
  level.self_loop.assign(level.size, 0.0);
  level.strength.assign(level.size, 0.0);
  std::map<std::pair<std::size_t, std::size_t>, double> merged;
  for (const auto& edge : graph.edges) {
    merged[{std::min(edge.a, edge.b), std::max(edge.a, edge.b)}] += edge.weight;
  }
  for (const auto& [key, w] : merged) {
    auto [a, b] = key;
    level.neighbours[a].emplace_back(b, w);
    level.neighbours[b].emplace_back(a, w);
    level.strength[a] += w;
    level.strength[b] += w;
  }
  return level;
}

Level aggregate(const Level& level, const std::vector<std::size_t>& community, std::size_t count) {
  Level next;
  next.size = count;
  next.neighbours.resize(count);
  next.self_loop.assign(count, 0.0);
  next.strength.assign(count, 0.0);
  std::vector<std::map<std::size_t, double>> links(count);
  for (std::size_t i = 0; i < level.size; ++i) {
    const auto ci = community[i];
    next.self_loop[ci] += level.self_loop[i];
    next.strength[ci] += level.strength[i];
    for (auto [j, w] : level.neighbours[i]) {
      const auto cj = community[j];
      if (ci == cj) {
        next.self_loop[ci] += w;  // visited from both ends, so counted twice
      } else {
        links[ci][cj] += w;
      }
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    next.neighbours[c].assign(links[c].begin(), links[c].end());
  }
  return next;
}

void shuffle(std::vector<std::size_t>& order, std::mt19937_64& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
}

// Local moving phase. Returns true if any node changed community.
bool move_nodes(const Level& level, double gamma, double two_m, std::vector<std::size_t>& community,
                std::mt19937_64& rng) {
  std::vector<double> total(level.size, 0.0);
  for (std::size_t i = 0; i < level.size; ++i) total[community[i]] += level.strength[i];

  std::vector<std::size_t> order(level.size);
  for (std::size_t i = 0; i < level.size; ++i) order[i] = i;

  std::vector<double> link_to(level.size, 0.0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  bool improved = true;
  while (improved) {
    improved = false;
    shuffle(order, rng);
    for (std::size_t node : order) {
      const std::size_t own = community[node];
      const double k_i = level.strength[node];

      touched.clear();
      for (auto [j, w] : level.neighbours[node]) {
        const auto c = community[j];
        if (link_to[c] == 0.0) touched.push_back(c);
        link_to[c] += w;
      }
      total[own] -= k_i;

      auto gain = [&](std::size_t c) { return link_to[c] - gamma * total[c] * k_i / two_m; };
      std::size_t best = own;
      double best_gain = gain(own);
      std::sort(touched.begin(), touched.end());
      for (std::size_t c : touched) {
        if (c == own) continue;
        const double g = gain(c);
        if (g > best_gain + kGainEpsilon) {
          best = c;
          best_gain = g;
        }
      }
      total[best] += k_i;
      if (best != own) {
        community[node] = best;
        improved = true;
        any_move = true;
      }
      for (std::size_t c : touched) link_to[c] = 0.0;
      link_to[own] = 0.0;
    }
  }
  return any_move;
}

// Relabels to 0..n-1 by first appearance; returns the community count.
std::size_t renumber(std::vector<std::size_t>& community) {
  std::map<std::size_t, std::size_t> relabel;
  for (auto& c : community) {
    auto [it, inserted] = relabel.emplace(c, relabel.size());
    c = it->second;
  }
  return relabel.size();
}

}  // namespace

double gamma_for_resolution(double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::InvalidArgument, "resolution must be > 0");
  }
  return 1.0 / resolution;
}

double modularity(const WeightedGraph& graph, std::span<const int> partition, double resolution) {
  const double gamma = gamma_for_resolution(resolution);
  if (partition.size() != graph.nodes.size()) {
    throw Error(ErrorCode::PartitionIncomplete, "partition covers " + std::to_string(partition.size()) +
                                                    " of " + std::to_string(graph.nodes.size()) + " nodes");
  }
  if (std::any_of(partition.begin(), partition.end(), [](int c) { return c < 0; })) {
    throw Error(ErrorCode::PartitionIncomplete, "unassigned node");
  }
  const double two_m = 2.0 * graph.total_weight();
  if (two_m <= 0.0) return 0.0;

  std::map<int, double> internal;  // sum of A_ij over i, j in the community
  std::map<int, double> total;
  for (const auto& edge : graph.edges) {
    if (partition[edge.a] == partition[edge.b]) internal[partition[edge.a]] += 2.0 * edge.weight;
  }
  const auto s = graph.strengths();
  for (std::size_t i = 0; i < s.size(); ++i) total[partition[i]] += s[i];

  double q = 0.0;
  for (const auto& [c, tot] : total) {
    q += internal[c] / two_m - gamma * (tot / two_m) * (tot / two_m);
  }
  return q;
}

namespace {

// One seeded Louvain run followed by multilevel refinement; returns the
// membership of the original nodes.
std::vector<std::size_t> louvain_run(const WeightedGraph& graph, double gamma, double two_m,
                                     std::uint64_t seed) {
  std::vector<std::size_t> membership(graph.nodes.size());
  for (std::size_t i = 0; i < membership.size(); ++i) membership[i] = i;
  std::mt19937_64 rng(seed);
  const Level base = level_from_graph(graph);

  auto climb = [&](Level level) {
    while (true) {
      std::vector<std::size_t> community(level.size);
      for (std::size_t i = 0; i < level.size; ++i) community[i] = i;
      if (!move_nodes(level, gamma, two_m, community, rng)) break;
      const std::size_t count = renumber(community);
      for (auto& m : membership) m = community[m];
      if (count == level.size) break;
      level = aggregate(level, community, count);
    }
  };

  climb(base);
  // single-node moves on the original graph, then climb again from there
  for (int round = 0; round < 100; ++round) {
    std::vector<std::size_t> community = membership;
    if (!move_nodes(base, gamma, two_m, community, rng)) break;
    const std::size_t count = renumber(community);
    membership = community;
    climb(aggregate(base, community, count));
  }
  return membership;
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  if (restart == 0) return seed;
  // splitmix64 step
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CommunityAssignment louvain_communities(const WeightedGraph& graph, double resolution,
                                        std::uint64_t seed) {
  const double gamma = gamma_for_resolution(resolution);
  if (graph.nodes.empty()) throw Error(ErrorCode::EmptyGraph, "no nodes");
  for (const auto& edge : graph.edges) {
    if (edge.a >= graph.nodes.size() || edge.b >= graph.nodes.size() || edge.a == edge.b ||
        !(edge.weight > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "invalid edge");
    }
  }

  CommunityAssignment out;
  out.resolution = resolution;
  std::vector<int> singletons(graph.nodes.size());
  for (std::size_t i = 0; i < singletons.size(); ++i) singletons[i] = static_cast<int>(i);
  out.community = singletons;
  out.count = static_cast<int>(graph.nodes.size());
  out.modularity = modularity(graph, out.community, resolution);

  const double two_m = 2.0 * graph.total_weight();
  if (two_m <= 0.0) return out;
  // keep the best of several seeded runs; earlier runs win ties
  for (int restart = 0; restart < kLouvainRestarts; ++restart) {
    auto membership = louvain_run(graph, gamma, two_m, restart_seed(seed, restart));
    const auto count = renumber(membership);
    std::vector<int> community(membership.begin(), membership.end());
    const double q = modularity(graph, community, resolution);
    if (restart == 0 || q > out.modularity + kGainEpsilon) {
      out.community = std::move(community);
      out.count = static_cast<int>(count);
      out.modularity = q;
    }
  }
  return out;
}

}  // namespace discursive::netgraph
