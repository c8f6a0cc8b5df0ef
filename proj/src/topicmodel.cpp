#include "discursive/topicmodel.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "discursive/error.hpp"
#include "discursive/io.hpp"

namespace discursive::topicmodel {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void LdaConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  if (!(resolved_alpha() > 0.0) || !std::isfinite(resolved_alpha())) {
    throw Error(ErrorCode::InvalidConfig, "alpha must be > 0");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidConfig, "beta must be > 0");
  if (iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) {
    throw Error(ErrorCode::InvalidConfig, "burn_in must be in [0, iterations)");
  }
  if (average_last_m < 0 || average_last_m > iterations - burn_in) {
    throw Error(ErrorCode::InvalidConfig, "average_last_m must be in [0, iterations - burn_in]");
  }
}

std::string LdaConfig::to_text() const {
  std::string out;
  out += "k=" + std::to_string(k) + "\n";
  out += "alpha=" + io::format_double(resolved_alpha()) + "\n";
  out += "beta=" + io::format_double(beta) + "\n";
  out += "iterations=" + std::to_string(iterations) + "\n";
  out += "burn_in=" + std::to_string(burn_in) + "\n";
  out += "seed=" + std::to_string(seed) + "\n";
  out += "average_last_m=" + std::to_string(average_last_m) + "\n";
  return out;
}

LdaConfig LdaConfig::from_text(std::string_view text) {
  LdaConfig config;
  for (const auto& raw : io::lines(text)) {
    auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "config line without '=': " + std::string(line));
    }
    auto key = io::trim(line.substr(0, eq));
    auto value = io::trim(line.substr(eq + 1));
    if (key == "k") config.k = static_cast<int>(io::parse_int(value));
    else if (key == "alpha") config.alpha = io::parse_double(value);
    else if (key == "beta") config.beta = io::parse_double(value);
    else if (key == "iterations") config.iterations = static_cast<int>(io::parse_int(value));
    else if (key == "burn_in") config.burn_in = static_cast<int>(io::parse_int(value));
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(std::stoull(std::string(value)));
    else if (key == "average_last_m") config.average_last_m = static_cast<int>(io::parse_int(value));
    else throw Error(ErrorCode::ParseError, "unknown config key " + std::string(key));
  }
  return config;
}

long long TopicModel::doc_index(std::string_view doc_id) const {
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    if (doc_ids[i] == doc_id) return static_cast<long long>(i);
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Sampler

GibbsSampler::GibbsSampler(const textprep::DocTermMatrix& dtm, LdaConfig config)
    : dtm_(dtm), config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  if (dtm.num_docs() == 0 || dtm.num_terms() == 0 || dtm.total_count() == 0) {
    throw Error(ErrorCode::EmptyMatrix, "document-term matrix has no tokens");
  }
  k_ = static_cast<std::size_t>(config_.k);
  vocab_size_ = dtm.num_terms();
  alpha_ = config_.resolved_alpha();
  beta_ = config_.beta;

  const std::size_t docs = dtm.num_docs();
  doc_offset_.resize(docs + 1, 0);
  for (std::size_t d = 0; d < docs; ++d) {
    doc_offset_[d + 1] = doc_offset_[d] + static_cast<std::size_t>(dtm.row_length(d));
  }
  words_.resize(doc_offset_.back());
  for (std::size_t d = 0; d < docs; ++d) {
    std::size_t pos = doc_offset_[d];
    for (const auto& entry : dtm.rows[d]) {
      if (entry.term >= vocab_size_) {
        throw Error(ErrorCode::InvalidArgument, "term column out of range");
      }
      std::fill_n(words_.begin() + static_cast<std::ptrdiff_t>(pos), entry.count, entry.term);
      pos += entry.count;
    }
  }

  visit_order_.resize(docs);
  std::iota(visit_order_.begin(), visit_order_.end(), 0);
  std::sort(visit_order_.begin(), visit_order_.end(),
            [&](std::size_t a, std::size_t b) { return dtm.doc_ids[a] < dtm.doc_ids[b]; });
  for (std::size_t i = 1; i < docs; ++i) {
    if (dtm.doc_ids[visit_order_[i]] == dtm.doc_ids[visit_order_[i - 1]]) {
      throw Error(ErrorCode::InvalidArgument, "duplicate document id " + dtm.doc_ids[visit_order_[i]]);
    }
  }

  z_.assign(words_.size(), 0);
  doc_topic_.assign(docs * k_, 0);
  word_topic_.assign(vocab_size_ * k_, 0);
  topic_total_.assign(k_, 0);
  cumulative_.assign(k_, 0.0);

  for (std::size_t d : visit_order_) {
    for (std::size_t i = doc_offset_[d]; i < doc_offset_[d + 1]; ++i) {
      const auto topic = static_cast<std::uint32_t>(rng_() % k_);
      z_[i] = topic;
      ++doc_topic_[d * k_ + topic];
      ++word_topic_[words_[i] * k_ + topic];
      ++topic_total_[topic];
    }
  }
}

double GibbsSampler::uniform01() {
  // 53 random bits; platform independent unlike std::uniform_real_distribution.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

void GibbsSampler::sweep() {
  const double vocab_beta = static_cast<double>(vocab_size_) * beta_;
  for (std::size_t d : visit_order_) {
    std::int32_t* dt = doc_topic_.data() + d * k_;
    for (std::size_t i = doc_offset_[d]; i < doc_offset_[d + 1]; ++i) {
      const std::uint32_t w = words_[i];
      std::int32_t* wt = word_topic_.data() + static_cast<std::size_t>(w) * k_;
      const std::uint32_t old_topic = z_[i];
      --dt[old_topic];
      --wt[old_topic];
      --topic_total_[old_topic];

      double total = 0.0;
      for (std::size_t t = 0; t < k_; ++t) {
        total += (dt[t] + alpha_) * (wt[t] + beta_) /
                 (static_cast<double>(topic_total_[t]) + vocab_beta);
        cumulative_[t] = total;
      }
      const double u = uniform01() * total;
      std::size_t new_topic = 0;
      while (new_topic + 1 < k_ && !(u < cumulative_[new_topic])) ++new_topic;

      z_[i] = static_cast<std::uint32_t>(new_topic);
      ++dt[new_topic];
      ++wt[new_topic];
      ++topic_total_[new_topic];
    }
  }
  ++sweeps_;
}

void GibbsSampler::verify_counts() const {
  std::vector<std::int32_t> doc_topic(doc_topic_.size(), 0);
  std::vector<std::int32_t> word_topic(word_topic_.size(), 0);
  std::vector<std::int64_t> topic_total(k_, 0);
  for (std::size_t d = 0; d + 1 < doc_offset_.size(); ++d) {
    for (std::size_t i = doc_offset_[d]; i < doc_offset_[d + 1]; ++i) {
      if (z_[i] >= k_) throw Error(ErrorCode::InvalidArgument, "assignment out of range");
      ++doc_topic[d * k_ + z_[i]];
      ++word_topic[words_[i] * k_ + z_[i]];
      ++topic_total[z_[i]];
    }
  }
  if (doc_topic != doc_topic_ || word_topic != word_topic_ || topic_total != topic_total_) {
    throw Error(ErrorCode::InvalidArgument, "Gibbs tallies diverged from assignments");
  }
}

void GibbsSampler::add_estimate(std::vector<double>& theta, std::vector<double>& phi) const {
  const std::size_t docs = doc_offset_.size() - 1;
  const double k_alpha = static_cast<double>(k_) * alpha_;
  for (std::size_t d = 0; d < docs; ++d) {
    const auto length = static_cast<double>(doc_offset_[d + 1] - doc_offset_[d]);
    for (std::size_t t = 0; t < k_; ++t) {
      theta[d * k_ + t] += (doc_topic_[d * k_ + t] + alpha_) / (length + k_alpha);
    }
  }
  const double vocab_beta = static_cast<double>(vocab_size_) * beta_;
  for (std::size_t t = 0; t < k_; ++t) {
    const double denom = static_cast<double>(topic_total_[t]) + vocab_beta;
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      phi[t * vocab_size_ + w] += (word_topic_[w * k_ + t] + beta_) / denom;
    }
  }
}

TopicModel GibbsSampler::estimate() const {
  TopicModel model;
  model.config = config_;
  model.config.alpha = alpha_;
  model.doc_ids = dtm_.doc_ids;
  model.terms = dtm_.vocabulary.terms();
  model.z = z_;
  model.theta.assign(dtm_.num_docs() * k_, 0.0);
  model.phi.assign(k_ * vocab_size_, 0.0);
  add_estimate(model.theta, model.phi);
  return model;
}

TopicModel fit_lda(const textprep::DocTermMatrix& dtm, const LdaConfig& config) {
  GibbsSampler sampler(dtm, config);
  const int average_from = config.iterations - config.average_last_m;
  std::vector<double> theta_sum;
  std::vector<double> phi_sum;
  if (config.average_last_m > 0) {
    theta_sum.assign(dtm.num_docs() * sampler.k_, 0.0);
    phi_sum.assign(sampler.k_ * sampler.vocab_size_, 0.0);
  }
  for (int it = 0; it < config.iterations; ++it) {
    sampler.sweep();
    if (config.average_last_m > 0 && sampler.sweeps_done() > average_from) {
      sampler.add_estimate(theta_sum, phi_sum);
    }
  }
  TopicModel model = sampler.estimate();
  if (config.average_last_m > 0) {
    const double m = config.average_last_m;
    for (auto& v : theta_sum) v /= m;
    for (auto& v : phi_sum) v /= m;
    model.theta = std::move(theta_sum);
    model.phi = std::move(phi_sum);
  }
  return model;
}

// ---------------------------------------------------------------------------

std::vector<std::string> top_words(const TopicModel& model, int topic, std::size_t n) {
  if (topic < 0 || static_cast<std::size_t>(topic) >= model.num_topics()) {
    throw Error(ErrorCode::TopicOutOfRange, "topic " + std::to_string(topic));
  }
  auto row = model.phi_row(static_cast<std::size_t>(topic));
  std::vector<std::size_t> order(model.num_terms());
  std::iota(order.begin(), order.end(), 0);
  n = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return model.terms[a] < model.terms[b];
                    });
  std::vector<std::string> words;
  words.reserve(n);
  for (std::size_t i = 0; i < n; ++i) words.push_back(model.terms[order[i]]);
  return words;
}

double log_likelihood(const TopicModel& model, const textprep::DocTermMatrix& dtm) {
  if (model.doc_ids != dtm.doc_ids || model.terms != dtm.vocabulary.terms()) {
    throw Error(ErrorCode::ModelMatrixMismatch, "model was not fitted on this matrix");
  }
  const std::size_t k = model.num_topics();
  const std::size_t vocab = model.num_terms();
  double total = 0.0;
  for (std::size_t d = 0; d < dtm.num_docs(); ++d) {
    auto theta = model.theta_row(d);
    for (const auto& entry : dtm.rows[d]) {
      double p = 0.0;
      for (std::size_t t = 0; t < k; ++t) p += theta[t] * model.phi[t * vocab + entry.term];
      total += entry.count * std::log(p);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Serialization

void save_model(const TopicModel& model, const fs::path& dir, std::string_view provenance) {
  io::ensure_directory(dir);
  const auto header = io::comment_block(provenance);
  const std::size_t k = model.num_topics();

  io::write_file(dir / "config", header + model.config.to_text());

  std::string theta = header + "doc_id";
  for (std::size_t t = 0; t < k; ++t) theta += ",t" + std::to_string(t);
  theta += "\n";
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    theta += model.doc_ids[d];
    for (double v : model.theta_row(d)) theta += "," + io::format_double(v);
    theta += "\n";
  }
  io::write_file(dir / "theta.csv", theta);

  std::string phi = header + "topic";
  for (const auto& term : model.terms) phi += "," + term;
  phi += "\n";
  for (std::size_t t = 0; t < k; ++t) {
    phi += std::to_string(t);
    for (double v : model.phi_row(t)) phi += "," + io::format_double(v);
    phi += "\n";
  }
  io::write_file(dir / "phi.csv", phi);

  std::string z;
  z.reserve(model.z.size() * 4);
  for (std::uint32_t topic : model.z) {
    for (int shift = 0; shift < 32; shift += 8) z.push_back(static_cast<char>((topic >> shift) & 0xFF));
  }
  io::write_file(dir / "z.bin", z);

  json topwords;
  topwords["schema_version"] = 1;
  json topics = json::array();
  for (std::size_t t = 0; t < k; ++t) {
    topics.push_back({{"topic", t},
                      {"label", "T" + std::to_string(t + 1)},
                      {"words", top_words(model, static_cast<int>(t), 25)}});
  }
  topwords["topics"] = topics;
  io::write_file(dir / "topwords.json", topwords.dump(2) + "\n");
}

TopicModel load_model(const fs::path& dir) {
  TopicModel model;
  model.config = LdaConfig::from_text(io::read_file(dir / "config"));
  model.config.validate();
  const std::size_t k = model.num_topics();

  auto theta_lines = io::data_lines(io::read_file(dir / "theta.csv"));
  if (theta_lines.empty()) throw Error(ErrorCode::ParseError, "theta.csv: empty");
  for (std::size_t i = 1; i < theta_lines.size(); ++i) {
    auto fields = io::split(theta_lines[i], ',');
    if (fields.size() != k + 1) throw Error(ErrorCode::ParseError, "theta.csv: wrong width");
    model.doc_ids.push_back(fields[0]);
    for (std::size_t t = 0; t < k; ++t) model.theta.push_back(io::parse_double(fields[t + 1]));
  }

  auto phi_lines = io::data_lines(io::read_file(dir / "phi.csv"));
  if (phi_lines.size() != k + 1) throw Error(ErrorCode::ParseError, "phi.csv: wrong row count");
  auto header = io::split(phi_lines[0], ',');
  model.terms.assign(header.begin() + 1, header.end());
  for (std::size_t t = 0; t < k; ++t) {
    auto fields = io::split(phi_lines[t + 1], ',');
    if (fields.size() != model.terms.size() + 1) {
      throw Error(ErrorCode::ParseError, "phi.csv: wrong width");
    }
    for (std::size_t w = 0; w < model.terms.size(); ++w) {
      model.phi.push_back(io::parse_double(fields[w + 1]));
    }
  }

  auto z = io::read_file(dir / "z.bin");
  if (z.size() % 4 != 0) throw Error(ErrorCode::ParseError, "z.bin: truncated");
  model.z.resize(z.size() / 4);
  for (std::size_t i = 0; i < model.z.size(); ++i) {
    std::uint32_t topic = 0;
    for (int b = 0; b < 4; ++b) {
      topic |= static_cast<std::uint32_t>(static_cast<unsigned char>(z[i * 4 + b])) << (8 * b);
    }
    if (topic >= k) throw Error(ErrorCode::ParseError, "z.bin: topic out of range");
    model.z[i] = topic;
  }
  return model;
}

}  // namespace discursive::topicmodel
