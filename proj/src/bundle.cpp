#include "discursive/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "discursive/error.hpp"
#include "discursive/io.hpp"

namespace discursive::bundle {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string dump(const json& value) { return value.dump(2) + "\n"; }

std::string_view norm_name(netgraph::CentralityNorm norm) {
  return norm == netgraph::CentralityNorm::Max ? "max" : "sum";
}

std::string_view projection_name(netgraph::ProjectionWeight weighting) {
  switch (weighting) {
    case netgraph::ProjectionWeight::DotProduct: return "dot";
    case netgraph::ProjectionWeight::CoOccurrence: return "cooccurrence";
    case netgraph::ProjectionWeight::MinWeight: return "min";
  }
  return "dot";
}

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::BundleInvalid, message); }

json read_json(const fs::path& path) {
  if (!fs::exists(path)) invalid("missing " + path.filename().string());
  try {
    auto value = json::parse(io::read_file(path));
    if (value.is_object() && value.contains("schema_version") &&
        value["schema_version"] != kSchemaVersion) {
      invalid(path.filename().string() + ": unsupported schema_version");
    }
    return value;
  } catch (const json::exception& e) {
    invalid(path.filename().string() + ": " + e.what());
  }
}

}  // namespace

void BundleConfig::validate() const {
  if (levels.empty() || resolutions.empty()) {
    throw Error(ErrorCode::InvalidConfig, "network grid needs at least one level and resolution");
  }
  for (double level : levels) {
    if (!(level > 0.0) || level > 1.0) {
      throw Error(ErrorCode::InvalidConfig, "level " + io::format_double(level) + " not in (0, 1]");
    }
  }
  for (double resolution : resolutions) {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
      throw Error(ErrorCode::InvalidConfig,
                  "resolution " + io::format_double(resolution) + " must be > 0");
    }
  }
  if (!(prominence >= 0.0 && prominence <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "prominence threshold must be in [0, 1]");
  }
}

std::string network_stem(std::string_view kind, double level, double resolution) {
  return std::string(kind) + "_l" + io::format_double(level) + "_r" + io::format_double(resolution);
}

void write_bundle(const BundleInputs& inputs, const BundleConfig& config, const fs::path& dir) {
  config.validate();
  const auto& model = inputs.model;
  const std::size_t k = model.num_topics();
  io::ensure_directory(dir);
  io::ensure_directory(dir / "networks");

  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    io::write_file(dir / name, content);
    files.push_back(name);
  };

  put("stats.json", inputs.stats_json ? *inputs.stats_json
                                       : corpus::stats_to_json(corpus::compute_stats(inputs.corpus)));
  put("speeches.jsonl", corpus::to_jsonl(inputs.corpus.speeches));
  topicmodel::save_model(model, dir / "model", inputs.provenance);

  const auto series = landscape::yearly_shares(inputs.corpus, model);
  const auto table = landscape::rank_table(series, config.rank_threshold);
  put("landscape.json", landscape::landscape_to_json(series, table, model, inputs.provenance));

  json topics = json::array();
  json prominent = json::array();
  for (std::size_t t = 0; t < k; ++t) {
    const auto speeches =
        landscape::prominent_speeches(model, inputs.corpus, static_cast<int>(t), config.prominence);
    json list = json::array();
    for (const auto& s : speeches) list.push_back({{"id", s.speech_id}, {"score", s.score}});
    topics.push_back({{"id", t},
                      {"label", landscape::topic_label(t)},
                      {"words", topicmodel::top_words(model, static_cast<int>(t), 25)},
                      {"prominent_count", speeches.size()}});
    prominent.push_back({{"topic", t}, {"label", landscape::topic_label(t)}, {"speeches", list}});
  }
  put("topics.json", dump({{"schema_version", kSchemaVersion}, {"topics", topics}}));
  put("prominent.json", dump({{"schema_version", kSchemaVersion},
                              {"threshold", config.prominence},
                              {"topics", prominent}}));
  if (inputs.scan_json) put("scan.json", *inputs.scan_json);

  const auto weights = landscape::speaker_topic_weights(inputs.corpus, model);
  const auto graph = netgraph::build_bipartite(weights);
  json networks = json::array();
  for (double level : config.levels) {
    const auto view = netgraph::filter_edges(graph, level, config.remove_isolates, config.global_max);
    const auto projection = netgraph::project_one_mode(view, config.projection);
    for (double resolution : config.resolutions) {
      for (std::string kind : {"bipartite", "projection"}) {
        auto graph_bundle =
            kind == "bipartite"
                ? netgraph::make_bipartite_bundle(view, resolution, config.seed, config.normalization)
                : netgraph::make_projection_bundle(view, projection, resolution, config.seed,
                                                   config.normalization);
        const auto stem = "networks/" + network_stem(kind, level, resolution);
        put(stem + ".json", netgraph::export_graph(graph_bundle, netgraph::GraphFormat::Json));
        put(stem + ".gexf", netgraph::export_graph(graph_bundle, netgraph::GraphFormat::Gexf));
        networks.push_back({{"kind", kind},
                            {"level", level},
                            {"resolution", resolution},
                            {"json", stem + ".json"},
                            {"gexf", stem + ".gexf"}});
      }
    }
  }

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["provenance"] = inputs.provenance;
  manifest["num_topics"] = k;
  manifest["seed"] = config.seed;
  manifest["prominence"] = config.prominence;
  manifest["rank_threshold"] = config.rank_threshold;
  manifest["isolates_removed"] = config.remove_isolates;
  manifest["global_max"] = config.global_max;
  manifest["normalization"] = norm_name(config.normalization);
  manifest["projection"] = projection_name(config.projection);
  manifest["levels"] = config.levels;
  manifest["resolutions"] = config.resolutions;
  manifest["networks"] = networks;
  manifest["files"] = files;
  io::write_file(dir / "manifest.json", dump(manifest));
}

LoadedBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) invalid("not a directory: " + dir.string());
  const auto manifest = read_json(dir / "manifest.json");
  LoadedBundle out;
  out.dir = dir;
  try {
    if (!manifest.contains("schema_version")) invalid("manifest.json: no schema_version");
    out.num_topics = manifest.at("num_topics").get<int>();
    out.prominence = manifest.at("prominence").get<double>();
    out.levels = manifest.at("levels").get<std::vector<double>>();
    out.resolutions = manifest.at("resolutions").get<std::vector<double>>();
    for (const auto& name : manifest.at("files")) {
      if (!fs::exists(dir / name.get<std::string>())) invalid("missing " + name.get<std::string>());
    }
  } catch (const json::exception& e) {
    invalid(std::string("manifest.json: ") + e.what());
  }
  if (out.levels.empty() || out.resolutions.empty()) invalid("manifest.json: empty network grid");

  try {
    out.corpus = corpus::corpus_from_speeches(
        corpus::speeches_from_jsonl(io::read_file(dir / "speeches.jsonl")));
    out.model = topicmodel::load_model(dir / "model");
  } catch (const Error& e) {
    invalid(e.what());
  }
  if (static_cast<int>(out.model.num_topics()) != out.num_topics) {
    invalid("model has " + std::to_string(out.model.num_topics()) + " topics, manifest says " +
            std::to_string(out.num_topics));
  }
  for (const auto& id : out.model.doc_ids) {
    if (!out.corpus.find(id)) invalid("model row '" + id + "' is not a known speech");
  }

  out.landscape_json = read_json(dir / "landscape.json").dump(2) + "\n";
  out.topics_json = read_json(dir / "topics.json").dump(2) + "\n";

  std::set<std::string> topic_labels;
  for (int t = 0; t < out.num_topics; ++t) topic_labels.insert(landscape::topic_label(t));
  std::set<std::string> affiliations;
  for (const auto& speech : out.corpus.speeches) affiliations.insert(speech.affiliation);

  for (const auto& entry : manifest.at("networks")) {
    NetworkKey key;
    netgraph::GraphBundle graph;
    try {
      key = {entry.at("kind").get<std::string>(), entry.at("level").get<double>(),
             entry.at("resolution").get<double>()};
      graph = netgraph::import_graph_json(io::read_file(dir / entry.at("json").get<std::string>()));
    } catch (const json::exception& e) {
      invalid(std::string("manifest.json networks: ") + e.what());
    } catch (const Error& e) {
      invalid(e.what());
    }
    std::set<std::string> ids;
    for (const auto& node : graph.nodes) {
      const bool known = node.category == "topic" ? topic_labels.contains(node.id)
                                                  : affiliations.contains(node.id);
      if (!known) invalid("graph node '" + node.id + "' is unknown");
      ids.insert(node.id);
    }
    for (const auto& edge : graph.edges) {
      if (!ids.contains(edge.source) || !ids.contains(edge.target)) {
        invalid("graph edge " + edge.source + " - " + edge.target + " has unknown endpoint");
      }
    }
    out.networks[key] = std::move(graph);
  }
  for (double level : out.levels) {
    for (double resolution : out.resolutions) {
      for (std::string kind : {"bipartite", "projection"}) {
        if (!out.networks.contains({kind, level, resolution})) {
          invalid("missing network " + network_stem(kind, level, resolution));
        }
      }
    }
  }
  return out;
}

}  // namespace discursive::bundle
