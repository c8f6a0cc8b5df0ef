#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "discursive/textprep.hpp"

namespace discursive::topicmodel {

inline constexpr std::uint64_t kDefaultSeed = 2017;

struct LdaConfig {
  int k = 10;
  /// Symmetric doc-topic prior; 50/k when unset.
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 1000;
  int burn_in = 200;
  std::uint64_t seed = kDefaultSeed;
  /// Average the estimates over the last m sweeps; 0 keeps the final state only.
  int average_last_m = 0;

  double resolved_alpha() const { return alpha.value_or(50.0 / k); }
  /// Throws InvalidConfig.
  void validate() const;

  /// `key=value` lines.
  std::string to_text() const;
  static LdaConfig from_text(std::string_view text);
};

/// A fitted model. `theta` is docs x k, `phi` is k x |V|, both row-major.
/// `z` holds one topic per token, rows in matrix order and each row's tokens
/// expanded in ascending term-column order.
struct TopicModel {
  LdaConfig config;
  std::vector<std::string> doc_ids;
  std::vector<std::string> terms;
  std::vector<std::uint32_t> z;
  std::vector<double> theta;
  std::vector<double> phi;

  std::size_t num_topics() const { return static_cast<std::size_t>(config.k); }
  std::size_t num_docs() const { return doc_ids.size(); }
  std::size_t num_terms() const { return terms.size(); }

  std::span<const double> theta_row(std::size_t doc) const {
    return {theta.data() + doc * num_topics(), num_topics()};
  }
  std::span<const double> phi_row(std::size_t topic) const {
    return {phi.data() + topic * num_terms(), num_terms()};
  }
  /// Row index of a document id, or -1.
  long long doc_index(std::string_view doc_id) const;
};

/// Collapsed Gibbs sampler for one chain. Documents are visited in ascending
/// doc-id order regardless of their row order, so a permuted matrix yields
/// the same per-document assignments.
class GibbsSampler {
 public:
  GibbsSampler(const textprep::DocTermMatrix& dtm, LdaConfig config);

  /// One full pass over every token.
  void sweep();
  int sweeps_done() const { return sweeps_; }

  /// Recounts n_dt, n_tw, n_t from z and throws if the incrementally
  /// maintained tallies disagree.
  void verify_counts() const;

  /// Point estimate from the current state.
  TopicModel estimate() const;

  const std::vector<std::uint32_t>& assignments() const { return z_; }

 private:
  void add_estimate(std::vector<double>& theta, std::vector<double>& phi) const;
  double uniform01();

  const textprep::DocTermMatrix& dtm_;
  LdaConfig config_;
  std::size_t k_;
  std::size_t vocab_size_;
  double alpha_;
  double beta_;
  std::vector<std::size_t> visit_order_;
  std::vector<std::size_t> doc_offset_;
  std::vector<std::uint32_t> words_;
  std::vector<std::uint32_t> z_;
  std::vector<std::int32_t> doc_topic_;   // docs x k
  std::vector<std::int32_t> word_topic_;  // |V| x k
  std::vector<std::int64_t> topic_total_;
  std::vector<double> cumulative_;
  std::mt19937_64 rng_;
  int sweeps_ = 0;

  friend TopicModel fit_lda(const textprep::DocTermMatrix&, const LdaConfig&);
};

/// Runs `iterations` sweeps and estimates from the final state (or averages
/// the last `average_last_m`). Deterministic for a given (matrix, config).
TopicModel fit_lda(const textprep::DocTermMatrix& dtm, const LdaConfig& config);

/// Terms by descending probability, ties lexicographic. `n` is clamped to |V|.
std::vector<std::string> top_words(const TopicModel& model, int topic, std::size_t n = 25);

/// Sum over documents and terms of count * log(sum_t theta_dt * phi_tw).
double log_likelihood(const TopicModel& model, const textprep::DocTermMatrix& dtm);

/// Model directory: `config`, `theta.csv`, `phi.csv`, `z.bin` (little-endian
/// uint32 per token), `topwords.json`.
void save_model(const TopicModel& model, const std::filesystem::path& dir,
                std::string_view provenance_comment = {});
TopicModel load_model(const std::filesystem::path& dir);

}  // namespace discursive::topicmodel
