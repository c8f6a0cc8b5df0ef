#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "discursive/textprep.hpp"
#include "discursive/topicmodel.hpp"

namespace discursive::modelselect {

/// Jensen-Shannon divergence in nats: 0 <= JSD <= ln 2, with 0 log 0 = 0.
/// Throws DimensionMismatch or NotADistribution (negative entries or a sum
/// off by more than 1e-9).
double jensen_shannon(std::span<const double> p, std::span<const double> q);

struct DeveaudOptions {
  /// Restrict each pair to the union of both rows' top-n terms (renormalized)
  /// before measuring divergence.
  std::optional<std::size_t> top_n;
};

/// Mean Jensen-Shannon divergence over all unordered topic pairs.
/// Throws SingleTopic for k < 2.
double deveaud_score(const topicmodel::TopicModel& model, const DeveaudOptions& options = {});
/// Same, over explicit topic-word rows.
double deveaud_score(const std::vector<std::vector<double>>& phi_rows,
                     const DeveaudOptions& options = {});

struct ScanFailure {
  int k;
  std::string error;
};

struct DeveaudScan {
  std::vector<int> k_values;
  std::vector<double> scores;
  std::vector<topicmodel::TopicModel> models;  // empty unless retained
  std::vector<ScanFailure> failures;
  topicmodel::LdaConfig base_config;
  DeveaudOptions options;
};

struct ScanOptions {
  DeveaudOptions deveaud;
  bool keep_models = false;
  /// Fit the candidate models on worker threads.
  bool parallel = true;
};

/// Seed for the fit at `k`: base seed XOR k.
std::uint64_t seed_for_k(std::uint64_t base_seed, int k);

/// Fits one model per k and scores it. alpha, when unset in `base`, follows
/// the 50/k default for each k. Throws ScanFailed only if every k fails.
DeveaudScan scan_k(const textprep::DocTermMatrix& dtm, const std::vector<int>& k_range,
                   const topicmodel::LdaConfig& base, const ScanOptions& options = {});

/// Smallest k whose score rises over its left neighbour (or is first) and is
/// not exceeded by its right neighbour (or is last). Throws EmptyScan.
int select_first_local_peak(const DeveaudScan& scan);
int select_first_local_peak(const std::vector<int>& k_values, const std::vector<double>& scores);

/// `k,score` rows followed by a `chosen_k,<k>` line.
std::string scan_to_csv(const DeveaudScan& scan, int chosen_k, std::string_view provenance = {});
std::string scan_to_json(const DeveaudScan& scan, int chosen_k);

}  // namespace discursive::modelselect
