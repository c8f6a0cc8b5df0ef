#include "discursive/landscape.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>
#include <unordered_map>

#include "discursive/error.hpp"
#include "discursive/io.hpp"

namespace discursive::landscape {

using json = nlohmann::ordered_json;

namespace {

// Absorbs rounding in cumulative sums such as .2 + .3 so that a threshold met
// in exact arithmetic is met in floating point too.
constexpr double kCumulativeSlack = 1e-12;

std::unordered_map<std::string, std::size_t> row_index(const topicmodel::TopicModel& model) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(model.num_docs());
  for (std::size_t d = 0; d < model.num_docs(); ++d) index.emplace(model.doc_ids[d], d);
  return index;
}

}  // namespace

std::size_t dominant_topic(std::span<const double> theta_row) {
  std::size_t best = 0;
  for (std::size_t t = 1; t < theta_row.size(); ++t) {
    if (theta_row[t] > theta_row[best]) best = t;
  }
  return best;
}

LandscapeSeries yearly_shares(const corpus::Corpus& corpus, const topicmodel::TopicModel& model) {
  const auto index = row_index(model);
  const std::size_t k = model.num_topics();
  std::map<int, std::vector<int>> dominant_counts;
  LandscapeSeries series;
  series.num_topics = k;
  for (const auto& speech : corpus.speeches) {
    if (!speech.included()) continue;
    auto it = index.find(speech.id);
    if (it == index.end()) {
      series.unmodelled.push_back(speech.id);
      continue;
    }
    auto& counts = dominant_counts[speech.year];
    counts.resize(k, 0);
    ++counts[dominant_topic(model.theta_row(it->second))];
  }
  for (const auto& [year, counts] : dominant_counts) {
    const int total = std::accumulate(counts.begin(), counts.end(), 0);
    if (total == 0) continue;
    series.years.push_back(year);
    series.doc_counts.push_back(total);
    std::vector<double> shares(k);
    for (std::size_t t = 0; t < k; ++t) shares[t] = static_cast<double>(counts[t]) / total;
    series.share.push_back(std::move(shares));
  }
  return series;
}

std::vector<RankRow> rank_year(std::span<const double> shares, double threshold) {
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return shares[a] > shares[b]; });
  std::vector<RankRow> rows;
  double cumulative = 0.0;
  for (std::size_t t : order) {
    rows.push_back({t, shares[t]});
    cumulative += shares[t];
    if (cumulative >= threshold - kCumulativeSlack) break;
  }
  return rows;
}

RankTable rank_table(const LandscapeSeries& series, double threshold) {
  RankTable table;
  table.threshold = threshold;
  table.years = series.years;
  for (const auto& shares : series.share) table.rows.push_back(rank_year(shares, threshold));
  return table;
}

std::vector<ProminentSpeech> prominent_speeches(const topicmodel::TopicModel& model,
                                                const corpus::Corpus& corpus, int topic,
                                                double threshold) {
  if (topic < 0 || static_cast<std::size_t>(topic) >= model.num_topics()) {
    throw Error(ErrorCode::TopicOutOfRange, "topic " + std::to_string(topic));
  }
  const auto index = row_index(model);
  std::vector<ProminentSpeech> out;
  for (const auto& speech : corpus.speeches) {
    if (!speech.included()) continue;
    auto it = index.find(speech.id);
    if (it == index.end()) continue;
    const double score = model.theta_row(it->second)[static_cast<std::size_t>(topic)];
    if (score > threshold) out.push_back({speech.id, score});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.speech_id < b.speech_id;
  });
  return out;
}

SpeakerTopicWeights speaker_topic_weights(const corpus::Corpus& corpus,
                                          const topicmodel::TopicModel& model) {
  const auto index = row_index(model);
  const std::size_t k = model.num_topics();
  std::map<std::string, std::pair<std::vector<double>, int>> by_affiliation;
  for (const auto& speech : corpus.speeches) {
    if (!speech.included()) continue;
    auto it = index.find(speech.id);
    if (it == index.end()) continue;
    auto& [weights, count] = by_affiliation[speech.affiliation];
    weights.resize(k, 0.0);
    auto theta = model.theta_row(it->second);
    for (std::size_t t = 0; t < k; ++t) weights[t] += theta[t];
    ++count;
  }
  SpeakerTopicWeights out;
  out.num_topics = k;
  for (auto& [affiliation, entry] : by_affiliation) {
    out.affiliations.push_back(affiliation);
    out.weight.push_back(std::move(entry.first));
    out.speech_counts.push_back(entry.second);
  }
  return out;
}

std::string topic_label(std::size_t topic) { return "T" + std::to_string(topic + 1); }

std::string landscape_to_json(const LandscapeSeries& series, const RankTable& table,
                              const topicmodel::TopicModel& model, std::string_view provenance) {
  json out;
  out["schema_version"] = 1;
  if (!provenance.empty()) out["provenance"] = std::string(provenance);
  out["years"] = series.years;
  json topics = json::array();
  json keywords = json::object();
  for (std::size_t t = 0; t < series.num_topics; ++t) {
    auto words = topicmodel::top_words(model, static_cast<int>(t), 25);
    topics.push_back({{"id", t}, {"label", topic_label(t)}});
    keywords[topic_label(t)] = words;
  }
  out["topics"] = topics;
  out["shares"] = series.share;
  out["doc_counts"] = series.doc_counts;
  json ranks = json::array();
  for (std::size_t i = 0; i < table.years.size(); ++i) {
    json rows = json::array();
    for (const auto& row : table.rows[i]) {
      rows.push_back({{"topic", row.topic}, {"label", topic_label(row.topic)}, {"share", row.share}});
    }
    ranks.push_back({{"year", table.years[i]}, {"rows", rows}});
  }
  out["rank_table"] = {{"threshold", table.threshold}, {"years", ranks}};
  out["topic_keywords"] = keywords;
  out["unmodelled"] = series.unmodelled;
  return out.dump(2) + "\n";
}

std::string shares_to_csv(const LandscapeSeries& series) {
  std::string out = "year,topic,share,doc_count\n";
  for (std::size_t i = 0; i < series.years.size(); ++i) {
    for (std::size_t t = 0; t < series.num_topics; ++t) {
      out += std::to_string(series.years[i]) + "," + topic_label(t) + "," +
             io::format_double(series.share[i][t]) + "," + std::to_string(series.doc_counts[i]) + "\n";
    }
  }
  return out;
}

std::string rank_table_to_csv(const RankTable& table) {
  std::string out = "year,rank,topic,share\n";
  for (std::size_t i = 0; i < table.years.size(); ++i) {
    for (std::size_t r = 0; r < table.rows[i].size(); ++r) {
      const auto& row = table.rows[i][r];
      out += std::to_string(table.years[i]) + "," + std::to_string(r + 1) + "," +
             topic_label(row.topic) + "," + io::format_double(row.share) + "\n";
    }
  }
  return out;
}

}  // namespace discursive::landscape
