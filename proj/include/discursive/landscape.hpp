#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "discursive/corpus.hpp"
#include "discursive/topicmodel.hpp"

namespace discursive::landscape {

/// argmax, ties to the lowest index.
std::size_t dominant_topic(std::span<const double> theta_row);

struct LandscapeSeries {
  std::size_t num_topics = 0;
  std::vector<int> years;
  /// share[i][t] for years[i].
  std::vector<std::vector<double>> share;
  std::vector<int> doc_counts;
  /// Speech ids present in the corpus but not modelled (emptied by pruning).
  std::vector<std::string> unmodelled;
};

/// Per year, the fraction of modelled speeches whose dominant topic is t.
/// Excluded and dropped speeches count in neither numerator nor denominator;
/// years without speeches are omitted.
LandscapeSeries yearly_shares(const corpus::Corpus& corpus, const topicmodel::TopicModel& model);

struct RankRow {
  std::size_t topic;
  double share;
};

struct RankTable {
  double threshold = 0.5;
  std::vector<int> years;
  std::vector<std::vector<RankRow>> rows;
};

/// Ranks a single year's shares: descending share (ties to lower topic),
/// listed until the cumulative share reaches `threshold`.
std::vector<RankRow> rank_year(std::span<const double> shares, double threshold = 0.5);
RankTable rank_table(const LandscapeSeries& series, double threshold = 0.5);

struct ProminentSpeech {
  std::string speech_id;
  double score;
};

inline constexpr double kProminenceThreshold = 0.20;

/// Speeches with theta(topic) strictly above `threshold`, by descending score
/// then id. Throws TopicOutOfRange.
std::vector<ProminentSpeech> prominent_speeches(const topicmodel::TopicModel& model,
                                                const corpus::Corpus& corpus, int topic,
                                                double threshold = kProminenceThreshold);

struct SpeakerTopicWeights {
  std::size_t num_topics = 0;
  std::vector<std::string> affiliations;       // sorted
  std::vector<std::vector<double>> weight;     // [affiliation][topic]
  std::vector<int> speech_counts;
};

/// weight[a][t] = sum of theta_dt over the modelled speeches of affiliation a.
SpeakerTopicWeights speaker_topic_weights(const corpus::Corpus& corpus,
                                          const topicmodel::TopicModel& model);

std::string topic_label(std::size_t topic);

/// {schema_version, years, topics, shares, doc_counts, rank_table, topic_keywords}
std::string landscape_to_json(const LandscapeSeries& series, const RankTable& table,
                              const topicmodel::TopicModel& model, std::string_view provenance = {});
std::string shares_to_csv(const LandscapeSeries& series);
std::string rank_table_to_csv(const RankTable& table);

}  // namespace discursive::landscape
