#include <json.hpp>
#include <set>

#include "discursive/error.hpp"
#include "discursive/io.hpp"
#include "discursive/netgraph.hpp"

namespace discursive::netgraph {

using json = nlohmann::ordered_json;

namespace {

std::string_view norm_name(CentralityNorm norm) { return norm == CentralityNorm::Max ? "max" : "sum"; }

void check_unique_ids(const GraphBundle& bundle) {
  std::set<std::string> ids;
  for (const auto& node : bundle.nodes) {
    if (!ids.insert(node.id).second) {
      throw Error(ErrorCode::InvalidArgument, "node id '" + node.id + "' is not unique");
    }
  }
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out.push_back(c);
  }
  return out + "\"";
}

std::string to_gexf(const GraphBundle& bundle) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < bundle.nodes.size(); ++i) index[bundle.nodes[i].id] = i;

  const auto& m = bundle.meta;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n";
  out += "  <meta>\n    <creator>discursive</creator>\n";
  out += "    <description>" + xml_escape(m.kind) + " level=" + io::format_double(m.level) +
         " resolution=" + io::format_double(m.resolution) + " gamma=" + io::format_double(m.gamma) +
         " seed=" + std::to_string(m.seed) + "</description>\n  </meta>\n";
  out += "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n";
  out += "    <attributes class=\"node\">\n";
  out += "      <attribute id=\"0\" title=\"category\" type=\"string\"/>\n";
  out += "      <attribute id=\"1\" title=\"strength\" type=\"double\"/>\n";
  out += "      <attribute id=\"2\" title=\"centrality\" type=\"double\"/>\n";
  out += "      <attribute id=\"3\" title=\"community\" type=\"integer\"/>\n";
  out += "    </attributes>\n    <nodes>\n";
  for (std::size_t i = 0; i < bundle.nodes.size(); ++i) {
    const auto& node = bundle.nodes[i];
    out += "      <node id=\"n" + std::to_string(i) + "\" label=\"" + xml_escape(node.id) + "\">\n";
    out += "        <attvalues>\n";
    out += "          <attvalue for=\"0\" value=\"" + xml_escape(node.category) + "\"/>\n";
    out += "          <attvalue for=\"1\" value=\"" + io::format_double(node.strength) + "\"/>\n";
    out += "          <attvalue for=\"2\" value=\"" + io::format_double(node.centrality) + "\"/>\n";
    out += "          <attvalue for=\"3\" value=\"" + std::to_string(node.community) + "\"/>\n";
    out += "        </attvalues>\n      </node>\n";
  }
  out += "    </nodes>\n    <edges>\n";
  for (std::size_t e = 0; e < bundle.edges.size(); ++e) {
    const auto& edge = bundle.edges[e];
    out += "      <edge id=\"" + std::to_string(e) + "\" source=\"n" +
           std::to_string(index.at(edge.source)) + "\" target=\"n" +
           std::to_string(index.at(edge.target)) + "\" weight=\"" + io::format_double(edge.weight) +
           "\"/>\n";
  }
  out += "    </edges>\n  </graph>\n</gexf>\n";
  return out;
}

json meta_to_json(const GraphMeta& m) {
  return {{"kind", m.kind},
          {"level", m.level},
          {"resolution", m.resolution},
          {"gamma", m.gamma},
          {"seed", m.seed},
          {"isolates_removed", m.isolates_removed},
          {"global_max", m.global_max},
          {"normalization", m.normalization},
          {"modularity", m.modularity},
          {"communities", m.communities}};
}

}  // namespace

GraphBundle make_bipartite_bundle(const FilteredView& view, double resolution, std::uint64_t seed,
                                  CentralityNorm norm) {
  const auto graph = view_as_graph(view);
  const auto communities = louvain_communities(graph, resolution, seed);
  const auto strengths = graph.strengths();

  GraphBundle bundle;
  std::size_t node = 0;
  auto add_nodes = [&](NodeCategory category, const std::vector<std::string>& names,
                       const std::vector<bool>& present) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!present[i]) continue;
      bundle.nodes.push_back({names[i], std::string(to_string(category)), strengths[node],
                              weighted_normalized_degree(view, {category, i}, norm),
                              communities.community[node]});
      ++node;
    }
  };
  add_nodes(NodeCategory::Country, view.countries, view.country_present);
  add_nodes(NodeCategory::Topic, view.topics, view.topic_present);
  for (const auto& edge : view.edges) {
    bundle.edges.push_back({view.countries[edge.country], view.topics[edge.topic], edge.weight});
  }
  bundle.meta = {"bipartite",        view.level,       resolution,
                 gamma_for_resolution(resolution), seed, view.isolates_removed,
                 view.global_max,    std::string(norm_name(norm)), communities.modularity,
                 communities.count};
  check_unique_ids(bundle);
  return bundle;
}

GraphBundle make_projection_bundle(const FilteredView& view, const WeightedGraph& projection,
                                   double resolution, std::uint64_t seed, CentralityNorm norm) {
  GraphBundle bundle;
  CommunityAssignment communities;
  if (!projection.nodes.empty()) {
    communities = louvain_communities(projection, resolution, seed);
  }
  const auto strengths = projection.strengths();
  double reference = 0.0;
  for (double s : strengths) reference = norm == CentralityNorm::Max ? std::max(reference, s) : reference + s;
  for (std::size_t i = 0; i < projection.nodes.size(); ++i) {
    bundle.nodes.push_back({projection.nodes[i], "country", strengths[i],
                            reference > 0.0 ? strengths[i] / reference : 0.0,
                            communities.community[i]});
  }
  for (const auto& edge : projection.edges) {
    bundle.edges.push_back({projection.nodes[edge.a], projection.nodes[edge.b], edge.weight});
  }
  bundle.meta = {"projection",       view.level,       resolution,
                 gamma_for_resolution(resolution), seed, view.isolates_removed,
                 view.global_max,    std::string(norm_name(norm)), communities.modularity,
                 communities.count};
  check_unique_ids(bundle);
  return bundle;
}

GraphFormat parse_format(std::string_view name) {
  if (name == "gexf") return GraphFormat::Gexf;
  if (name == "json") return GraphFormat::Json;
  if (name == "csv") return GraphFormat::Csv;
  throw Error(ErrorCode::UnsupportedFormat, std::string(name));
}

std::string export_graph(const GraphBundle& bundle, GraphFormat format) {
  switch (format) {
    case GraphFormat::Gexf:
      return to_gexf(bundle);
    case GraphFormat::Csv: {
      std::string out = "source,target,weight\n";
      for (const auto& edge : bundle.edges) {
        out += csv_field(edge.source) + "," + csv_field(edge.target) + "," +
               io::format_double(edge.weight) + "\n";
      }
      return out;
    }
    case GraphFormat::Json: {
      json out;
      out["schema_version"] = 1;
      json nodes = json::array();
      for (const auto& n : bundle.nodes) {
        nodes.push_back({{"id", n.id},
                         {"category", n.category},
                         {"strength", n.strength},
                         {"centrality", n.centrality},
                         {"community", n.community}});
      }
      json edges = json::array();
      for (const auto& e : bundle.edges) {
        edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
      }
      out["nodes"] = nodes;
      out["edges"] = edges;
      out["meta"] = meta_to_json(bundle.meta);
      return out.dump(2) + "\n";
    }
  }
  throw Error(ErrorCode::UnsupportedFormat, "unknown format");
}

void export_graph(const GraphBundle& bundle, GraphFormat format, const std::filesystem::path& path) {
  io::write_file(path, export_graph(bundle, format));
}

GraphBundle import_graph_json(std::string_view text) {
  try {
    auto in = json::parse(text);
    GraphBundle bundle;
    for (const auto& n : in.at("nodes")) {
      bundle.nodes.push_back({n.at("id").get<std::string>(), n.at("category").get<std::string>(),
                              n.at("strength").get<double>(), n.at("centrality").get<double>(),
                              n.at("community").get<int>()});
    }
    for (const auto& e : in.at("edges")) {
      bundle.edges.push_back({e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                              e.at("weight").get<double>()});
    }
    const auto& m = in.at("meta");
    bundle.meta.kind = m.at("kind").get<std::string>();
    bundle.meta.level = m.at("level").get<double>();
    bundle.meta.resolution = m.at("resolution").get<double>();
    bundle.meta.gamma = m.at("gamma").get<double>();
    bundle.meta.seed = m.at("seed").get<std::uint64_t>();
    bundle.meta.isolates_removed = m.at("isolates_removed").get<bool>();
    bundle.meta.global_max = m.at("global_max").get<bool>();
    bundle.meta.normalization = m.at("normalization").get<std::string>();
    bundle.meta.modularity = m.at("modularity").get<double>();
    bundle.meta.communities = m.at("communities").get<int>();
    return bundle;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph json: ") + e.what());
  }
}

}  // namespace discursive::netgraph
