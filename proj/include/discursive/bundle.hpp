#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "discursive/corpus.hpp"
#include "discursive/landscape.hpp"
#include "discursive/netgraph.hpp"
#include "discursive/topicmodel.hpp"

// The explorer bundle: every artifact the read-only service serves, written
// to one directory.
//
//   manifest.json            schema_version, provenance, topic count, grid
//   stats.json               corpus statistics
//   speeches.jsonl           all speeches including their raw text
//   model/                   saved topic model (theta, phi, assignments)
//   landscape.json           yearly shares, rank table, topic keywords
//   topics.json              topic labels and top words
//   prominent.json           per-topic speeches above the prominence threshold
//   scan.json                optional k-scan report
//   networks/<kind>_l<level>_r<resolution>.{json,gexf}
//                            kind is "bipartite" or "projection"
namespace discursive::bundle {

inline constexpr int kSchemaVersion = 1;

struct BundleConfig {
  std::vector<double> levels{0.15, 0.25};
  std::vector<double> resolutions{0.33, 1.0};
  std::uint64_t seed = topicmodel::kDefaultSeed;
  bool remove_isolates = true;
  bool global_max = false;
  netgraph::CentralityNorm normalization = netgraph::CentralityNorm::Max;
  netgraph::ProjectionWeight projection = netgraph::ProjectionWeight::DotProduct;
  double rank_threshold = 0.5;
  double prominence = landscape::kProminenceThreshold;

  /// Throws InvalidConfig for an empty grid, a level outside (0, 1] or a
  /// non-positive resolution.
  void validate() const;
};

/// File stem for one network, e.g. "bipartite_l0.25_r1".
std::string network_stem(std::string_view kind, double level, double resolution);

struct BundleInputs {
  corpus::Corpus corpus;
  /// stats.json content; recomputed from the corpus when unset.
  std::optional<std::string> stats_json;
  topicmodel::TopicModel model;
  std::optional<std::string> scan_json;
  std::string provenance;  // free text recorded in the manifest
};

/// Writes the bundle into `dir`. Output depends only on the inputs and config.
void write_bundle(const BundleInputs& inputs, const BundleConfig& config,
                  const std::filesystem::path& dir);

struct NetworkKey {
  std::string kind;
  double level;
  double resolution;
  auto operator<=>(const NetworkKey&) const = default;
};

struct LoadedBundle {
  std::filesystem::path dir;
  int num_topics = 0;
  double prominence = landscape::kProminenceThreshold;
  std::vector<double> levels;
  std::vector<double> resolutions;
  corpus::Corpus corpus;
  topicmodel::TopicModel model;
  std::string landscape_json;
  std::string topics_json;
  std::map<NetworkKey, netgraph::GraphBundle> networks;
};

/// Reads and cross-checks a bundle: every listed file present, schema
/// versions known, model rows refer to known speeches, graph nodes refer to
/// known affiliations and topics. Throws BundleInvalid.
LoadedBundle load_bundle(const std::filesystem::path& dir);

}  // namespace discursive::bundle
