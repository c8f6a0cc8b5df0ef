// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// nonzero if any criterion fails.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "discursive/bundle.hpp"
#include "discursive/corpus.hpp"
#include "discursive/error.hpp"
#include "discursive/io.hpp"
#include "discursive/landscape.hpp"
#include "discursive/modelselect.hpp"
#include "discursive/netgraph.hpp"
#include "discursive/service.hpp"
#include "discursive/textprep.hpp"
#include "discursive/topicmodel.hpp"
#include "graphs.hpp"
#include "pipeline.hpp"
#include "planted.hpp"

using namespace discursive;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kNormTol = 1e-9;
constexpr double kTvMax = 0.1;
constexpr double kLn2Tol = 1e-9;
constexpr double kModularityTol = 1e-9;
constexpr double kWeightTol = 1e-9;
constexpr double kCorpusSeconds = 1.0;
constexpr double kLdaSeconds = 30.0;
constexpr double kSelectSeconds = 180.0;
constexpr double kNetworkSeconds = 10.0;
constexpr double kEndToEndSeconds = 300.0;
// The k scan scores posterior-mean topics; single final-state estimates put
// k=2 and k=3 within sampling noise of each other on disjoint supports.
constexpr int kScanAverageLast = 100;

// Collects failed checks; a criterion passes when none were recorded.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& text) { notes_.push_back(text); }
  bool ok() const { return failed_ == 0; }
  int count() const { return count_; }
  std::string summary() const {
    std::string out;
    for (const auto& n : notes_) out += (out.empty() ? "" : ", ") + n;
    if (failed_ > 0) {
      out += (out.empty() ? "" : "; ") + std::to_string(failed_) + " failed:";
      for (const auto& f : failures_) out += " [" + f + "]";
    }
    return out;
  }

 private:
  int count_ = 0;
  int failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Outcome {
  std::string name;
  bool pass;
};

Outcome run_criterion(const std::string& name, double budget_seconds,
                      const std::function<void(Checks&)>& body) {
  Checks checks;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(checks);
  } catch (const std::exception& e) {
    checks.expect(false, std::string("exception: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0) {
    checks.expect(seconds < budget_seconds, "runtime " + fixed(seconds) + "s over " + fixed(budget_seconds, 0) + "s");
  }
  std::cout << (checks.ok() ? "PASS " : "FAIL ") << name << " (" << checks.count() << " checks, " << fixed(seconds, 2)
            << "s" << (budget_seconds > 0 ? " < " + fixed(budget_seconds, 0) + "s" : "") << ") "
            << checks.summary() << std::endl;
  return {name, checks.ok()};
}

corpus::BuildResult fixture_corpus() {
  return corpus::build_corpus(
      corpus::list_protocol_files(testsupport::fixture_dir() / "protocols"),
      corpus::AffiliationOverrides::load(testsupport::fixture_dir() / "overrides.txt"));
}

textprep::DocTermMatrix fixture_matrix(const corpus::Corpus& c) {
  textprep::PrepConfig config;
  std::vector<textprep::Document> docs;
  std::vector<std::vector<std::string>> lists;
  for (const auto* s : c.included()) {
    docs.push_back({s->id, textprep::preprocess_speech(s->text, config)});
    lists.push_back(docs.back().tokens);
  }
  return textprep::vectorize(docs, textprep::build_vocabulary(lists, config));
}

bool normalized(const topicmodel::TopicModel& m) {
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    auto row = m.theta_row(d);
    if (std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) > kNormTol) return false;
  }
  for (std::size_t t = 0; t < m.num_topics(); ++t) {
    auto row = m.phi_row(t);
    if (std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) > kNormTol) return false;
  }
  return true;
}

// Max per-topic TV under the best matching of fitted to planted topics.
double matched_tv(const topicmodel::TopicModel& m, const std::vector<std::vector<double>>& planted) {
  std::vector<std::size_t> perm(planted.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e9;
  do {
    double worst = 0.0;
    for (std::size_t t = 0; t < planted.size(); ++t) {
      auto row = m.phi_row(perm[t]);
      worst = std::max(worst, testsupport::total_variation({row.begin(), row.end()}, planted[t]));
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double jsd_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  double out = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) out += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0) out += 0.5 * q[i] * std::log(q[i] / m);
  }
  return out;
}

// Dominant-topic shares per year, recounted from theta.
std::map<int, std::vector<double>> recount_shares(const corpus::Corpus& c, const topicmodel::TopicModel& m) {
  std::map<int, std::vector<int>> counts;
  const std::size_t k = m.num_topics();
  for (const auto& s : c.speeches) {
    if (s.excluded) continue;
    const auto row = m.doc_index(s.id);
    if (row < 0) continue;
    std::size_t best = 0;
    for (std::size_t t = 1; t < k; ++t) {
      if (m.theta[static_cast<std::size_t>(row) * k + t] > m.theta[static_cast<std::size_t>(row) * k + best]) best = t;
    }
    counts[s.year].resize(k);
    ++counts[s.year][best];
  }
  std::map<int, std::vector<double>> out;
  for (const auto& [year, row] : counts) {
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    for (int n : row) out[year].push_back(n / total);
  }
  return out;
}

bool shares_match(const landscape::LandscapeSeries& series, const std::map<int, std::vector<double>>& expected) {
  if (series.years.size() != expected.size()) return false;
  for (std::size_t i = 0; i < series.years.size(); ++i) {
    const auto it = expected.find(series.years[i]);
    if (it == expected.end() || it->second != series.share[i]) return false;
  }
  return true;
}

// Affiliation x topic sums of theta over included, modelled speeches.
std::map<std::string, std::vector<double>> affiliation_weights(const corpus::Corpus& c,
                                                               const topicmodel::TopicModel& m) {
  std::map<std::string, std::vector<double>> out;
  const std::size_t k = m.num_topics();
  for (std::size_t d = 0; d < m.doc_ids.size(); ++d) {
    const auto* s = c.find(m.doc_ids[d]);
    if (!s || s->excluded) continue;
    auto& row = out[s->affiliation];
    row.resize(k, 0.0);
    for (std::size_t t = 0; t < k; ++t) row[t] += m.theta[d * k + t];
  }
  return out;
}

landscape::SpeakerTopicWeights random_weights(std::mt19937_64& rng, std::size_t max_countries) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  landscape::SpeakerTopicWeights w;
  const std::size_t countries = 1 + rng() % max_countries;
  w.num_topics = 1 + rng() % 5;
  for (std::size_t c = 0; c < countries; ++c) {
    w.affiliations.push_back("c" + std::to_string(c));
    w.weight.emplace_back(w.num_topics, 0.0);
    for (auto& v : w.weight.back()) v = u(rng) < 0.3 ? 0.0 : 10.0 * u(rng);
  }
  w.speech_counts.assign(countries, 1);
  return w;
}

// Minimal structural schema: an object maps required keys to sub-schemas, a
// one-element array gives the item schema, a string names the type.
void check_schema(const json& value, const json& schema, const std::string& path, Checks& checks) {
  if (schema.is_object()) {
    if (!value.is_object()) {
      checks.expect(false, path + " not an object");
      return;
    }
    for (const auto& [key, sub] : schema.items()) {
      if (!value.contains(key)) {
        checks.expect(false, path + "." + key + " missing");
        continue;
      }
      check_schema(value.at(key), sub, path + "." + key, checks);
    }
    return;
  }
  if (schema.is_array()) {
    if (!value.is_array()) {
      checks.expect(false, path + " not an array");
      return;
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      check_schema(value[i], schema[0], path + "[" + std::to_string(i) + "]", checks);
    }
    return;
  }
  const auto type = schema.get<std::string>();
  bool ok = type == "any";
  for (std::string_view option : {"string", "number", "integer", "boolean", "null", "array", "object"}) {
    if (type.find(option) == std::string::npos) continue;
    if ((option == "string" && value.is_string()) || (option == "number" && value.is_number()) ||
        (option == "integer" && value.is_number_integer()) || (option == "boolean" && value.is_boolean()) ||
        (option == "null" && value.is_null()) || (option == "array" && value.is_array()) ||
        (option == "object" && value.is_object())) {
      ok = true;
    }
  }
  checks.expect(ok, path + " is not " + type);
}

const json kLandscapeSchema = json::parse(R"({
  "schema_version": "integer", "years": ["integer"], "doc_counts": ["integer"], "shares": [["number"]],
  "topics": [{"id": "integer", "label": "string"}], "topic_keywords": "object",
  "rank_table": {"threshold": "number", "years": [{"year": "integer",
                 "rows": [{"topic": "integer", "label": "string", "share": "number"}]}]},
  "unmodelled": ["string"]})");
const json kTopicsSchema = json::parse(R"({
  "schema_version": "integer",
  "topics": [{"id": "integer", "label": "string", "words": ["string"], "prominent_count": "integer"}]})");
const json kSpeechesSchema = json::parse(R"({
  "schema_version": "integer", "topic": "integer", "label": "string", "threshold": "number",
  "speeches": [{"id": "string", "score": "number", "speaker_name": "string", "affiliation": "string",
                "date": "string"}]})");
const json kSpeechSchema = json::parse(R"({
  "schema_version": "integer", "id": "string", "protocol_id": "string", "date": "string", "year": "integer",
  "speaker_name": "string", "affiliation": "string", "excluded": "boolean", "exclusion_reason": "string|null",
  "topic_scores": "array|null", "text": "string"})");
const json kNetworkSchema = json::parse(R"({
  "schema_version": "integer", "mode": "string", "requested": "object",
  "served": {"level": "number", "resolution": "number"},
  "available": {"levels": ["number"], "resolutions": ["number"]},
  "graph": {"schema_version": "integer",
            "nodes": [{"id": "string", "category": "string", "strength": "number", "centrality": "number",
                       "community": "integer"}],
            "edges": [{"source": "string", "target": "string", "weight": "number"}],
            "meta": {"kind": "string", "level": "number", "resolution": "number", "gamma": "number",
                     "seed": "integer", "modularity": "number", "communities": "integer"}}})");

// ---------------------------------------------------------------------------

void corpus_criterion(Checks& c) {
  const auto built = fixture_corpus();
  const auto& st = built.stats;
  c.expect(st.protocol_count == 11, "11 protocols");
  c.expect(st.speech_count == 55, "55 speeches");
  c.expect(st.included_count == 39, "39 included");
  c.expect(st.speeches_per_year == std::map<int, int>{{2001, 10}, {2002, 8}, {2003, 6}, {2004, 7}, {2005, 8}},
           "per-year histogram");
  c.expect(st.exclusions == std::map<std::string, int>{{"president", 14}, {"unresolved", 2}}, "exclusion ledger");
  c.expect(st.failures.empty(), "no failures");
  std::map<std::string, const corpus::Protocol*> protocols;
  for (const auto& p : built.corpus.protocols) protocols[p.id] = &p;
  for (const auto& file : corpus::list_protocol_files(testsupport::fixture_dir() / "protocols")) {
    const auto protocol = corpus::parse_protocol_header(io::read_file(file));
    c.expect(corpus::segment_speeches(protocol.body).reconstruct() == protocol.body,
             "segmentation round trip " + file.filename().string());
  }
  for (const auto& s : built.corpus.speeches) {
    c.expect(protocols.at(s.protocol_id)->body.find(s.text) != std::string::npos, "text conserved " + s.id);
  }
  const auto text = corpus::to_jsonl(built.corpus.speeches);
  c.expect(corpus::speeches_from_jsonl(text) == built.corpus.speeches, "jsonl round trip");
  c.note("55 speeches, 39 included, 14 president, 2 unresolved");
}

void prep_criterion(Checks& c) {
  const auto built = fixture_corpus();
  textprep::PrepConfig config;
  c.expect(config.min_count == 3, "default min_count is 3");
  std::vector<textprep::Document> docs;
  std::vector<std::vector<std::string>> lists;
  std::map<std::string, long long> freq;
  for (const auto* s : built.corpus.included()) {
    docs.push_back({s->id, textprep::preprocess_speech(s->text, config)});
    lists.push_back(docs.back().tokens);
    for (const auto& t : docs.back().tokens) ++freq[t];
  }
  const auto vocabulary = textprep::build_vocabulary(lists, config);
  long long kept_tokens = 0;
  std::size_t kept_terms = 0;
  for (const auto& [term, count] : freq) {
    const bool kept = vocabulary.index_of(term) >= 0;
    c.expect(kept == (count >= 3), "min-count rule for " + term);
    if (count >= 3) {
      kept_tokens += count;
      ++kept_terms;
    }
  }
  c.expect(vocabulary.size() == kept_terms, "vocabulary size");
  const auto dtm = textprep::vectorize(docs, vocabulary);
  c.expect(dtm.total_count() == kept_tokens, "token conservation");
  c.expect(dtm.num_docs() + dtm.dropped_docs.size() == docs.size(), "document conservation");

  std::mt19937_64 rng(7);
  int cases = 0;
  for (; cases < 150; ++cases) {
    std::vector<std::vector<std::string>> random(1 + rng() % 12);
    for (auto& list : random) {
      const auto len = rng() % 40;
      for (std::size_t i = 0; i < len; ++i) list.push_back("w" + std::to_string(std::min(rng() % 25, rng() % 25)));
    }
    std::set<std::string> previous;
    for (int m = 1; m <= 8; ++m) {
      textprep::PrepConfig pc;
      pc.stopwords.clear();
      pc.min_count = m;
      std::set<std::string> current;
      try {
        const auto v = textprep::build_vocabulary(random, pc);
        current.insert(v.terms().begin(), v.terms().end());
      } catch (const Error& e) {
        c.expect(e.code() == ErrorCode::EmptyVocabulary, "only EmptyVocabulary");
      }
      if (m > 1) {
        c.expect(std::includes(previous.begin(), previous.end(), current.begin(), current.end()),
                 "monotone at case " + std::to_string(cases));
      }
      previous = std::move(current);
    }
  }
  c.note(std::to_string(kept_terms) + " terms kept, " + std::to_string(cases) + " random corpora");
}

void lda_criterion(Checks& c) {
  const auto planted = testsupport::make_planted({});
  topicmodel::LdaConfig config;
  config.k = 3;
  const auto a = topicmodel::fit_lda(planted.dtm, config);
  const auto b = topicmodel::fit_lda(planted.dtm, config);
  const double tv = matched_tv(a, planted.planted);
  c.expect(tv < kTvMax, "planted TV " + fixed(tv, 4));
  c.expect(normalized(a) && normalized(b), "normalization");
  c.expect(a.z == b.z && a.theta == b.theta && a.phi == b.phi, "bitwise determinism");

  auto collapse_config = config;
  collapse_config.k = 1;
  const auto one = topicmodel::fit_lda(planted.dtm, collapse_config);
  c.expect(normalized(one), "normalization k=1");
  const double n = static_cast<double>(planted.dtm.total_count());
  const double v = static_cast<double>(planted.dtm.num_terms());
  bool exact = std::all_of(one.theta.begin(), one.theta.end(), [](double t) { return t == 1.0; });
  for (std::size_t w = 0; w < planted.dtm.num_terms(); ++w) {
    const double expected = (static_cast<double>(planted.dtm.vocabulary.count(w)) + config.beta) / (n + v * config.beta);
    exact = exact && std::abs(one.phi[w] - expected) <= 4 * std::numeric_limits<double>::epsilon() * expected;
  }
  c.expect(exact, "k=1 collapse");
  c.note("TV " + fixed(tv, 4) + " < " + fixed(kTvMax, 1));
}

void select_criterion(Checks& c) {
  const std::vector<double> p{0.2, 0.3, 0.5}, a{1.0, 0.0}, b{0.0, 1.0};
  c.expect(modelselect::jensen_shannon(p, p) == 0.0, "JSD(p, p) = 0");
  c.expect(std::abs(modelselect::jensen_shannon(a, b) - std::log(2.0)) <= kLn2Tol, "JSD disjoint = ln 2");
  c.expect(std::abs(modelselect::jensen_shannon(a, b) - 0.693147) < 1e-6, "ln 2 ~ 0.693147");
  const std::vector<double> half{0.5, 0.5};
  c.expect(std::abs(modelselect::jensen_shannon(half, a) - jsd_oracle(half, a)) < 1e-12, "JSD oracle");

  const auto planted = testsupport::make_planted({});
  const std::vector<int> ks{2, 3, 4, 5, 6, 7, 8};
  int hits = 0;
  std::string chosen;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    topicmodel::LdaConfig base;
    base.seed = seed;
    base.average_last_m = kScanAverageLast;
    const auto scan = modelselect::scan_k(planted.dtm, ks, base);
    const int k = modelselect::select_first_local_peak(scan.k_values, scan.scores);
    chosen += std::to_string(k);
    if (k == 3) ++hits;
    if (seed == 1) {
      const bool peak = scan.k_values == ks && scan.scores[1] > scan.scores[0] && scan.scores[1] >= scan.scores[2];
      c.expect(peak, "local peak at k=3 on seed 1");
    }
  }
  c.expect(hits >= 9, "k=3 chosen in " + std::to_string(hits) + "/10 seeds");
  c.note("k=3 in " + std::to_string(hits) + "/10 seeds (choices " + chosen + ", estimates averaged over last " +
         std::to_string(kScanAverageLast) + " sweeps)");
}

void landscape_criterion(Checks& c) {
  const auto built = fixture_corpus();
  const auto dtm = fixture_matrix(built.corpus);
  int models = 0;
  for (int k = 2; k <= 6; ++k) {
    topicmodel::LdaConfig config;
    config.k = k;
    config.iterations = 200;
    config.burn_in = 50;
    const auto model = topicmodel::fit_lda(dtm, config);
    c.expect(shares_match(landscape::yearly_shares(built.corpus, model), recount_shares(built.corpus, model)),
             "fixture recount k=" + std::to_string(k));
    ++models;
  }
  // synthetic two-year corpora with random theta
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial, ++models) {
    std::vector<corpus::Speech> speeches;
    topicmodel::TopicModel model;
    const std::size_t k = 2 + rng() % 5;
    model.config.k = static_cast<int>(k);
    model.terms = {"w"};
    model.phi.assign(k, 1.0);
    for (int i = 0; i < 12; ++i) {
      corpus::Speech s;
      s.id = "s" + std::to_string(i);
      s.protocol_id = "P";
      s.year = 2001 + i % 2;
      s.date = {s.year, 1, 1};
      s.speaker_name = "Mr. X";
      s.affiliation = "A";
      s.text = "t";
      if (rng() % 6 == 0) s.excluded = corpus::ExclusionReason::President;
      speeches.push_back(s);
      model.doc_ids.push_back(s.id);
      std::vector<double> row(k);
      double sum = 0.0;
      for (auto& v : row) sum += v = std::floor(u(rng) * 4.0) + 0.5;  // ties are likely
      for (auto& v : row) model.theta.push_back(v / sum);
    }
    const auto synthetic = corpus::corpus_from_speeches(speeches);
    c.expect(shares_match(landscape::yearly_shares(synthetic, model), recount_shares(synthetic, model)),
             "synthetic recount " + std::to_string(trial));
  }

  auto published = [](std::map<int, double> labelled, double rest) {
    std::vector<double> shares(10, 0.0);
    for (auto [label, share] : labelled) shares[static_cast<std::size_t>(label - 1)] = share;
    const double each = rest / static_cast<double>(10 - labelled.size());
    for (auto& s : shares) {
      if (s == 0.0) s = each;
    }
    return shares;
  };
  auto labels = [](const std::vector<landscape::RankRow>& rows) {
    std::vector<std::string> out;
    for (const auto& r : rows) out.push_back(landscape::topic_label(r.topic));
    return out;
  };
  const auto y2001 = published({{4, 0.27}, {9, 0.20}, {2, 0.17}}, 0.36);
  c.expect(*std::max_element(y2001.begin() + 0, y2001.end()) == 0.27, "2001 rest below .17");
  c.expect(labels(landscape::rank_year(y2001, 0.5)) == std::vector<std::string>{"T4", "T9", "T2"}, "2001 row");
  const auto y2002 = published({{8, 0.69}}, 0.31);
  c.expect(labels(landscape::rank_year(y2002, 0.5)) == std::vector<std::string>{"T8"}, "2002 row");
  c.note(std::to_string(models) + " recounts, rows [T4,T9,T2] and [T8]");
}

void network_criterion(Checks& c) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto w = random_weights(rng, 7);
    const double level = std::max(1e-3, u(rng));
    const auto view = netgraph::filter_edges(netgraph::build_bipartite(w), level, true);
    std::set<std::pair<std::size_t, std::size_t>> expected, got;
    for (std::size_t t = 0; t < w.num_topics; ++t) {
      double max = 0.0;
      for (const auto& row : w.weight) max = std::max(max, row[t]);
      for (std::size_t a = 0; a < w.weight.size(); ++a) {
        if (w.weight[a][t] > 0 && w.weight[a][t] >= level * max) expected.emplace(a, t);
      }
    }
    for (const auto& e : view.edges) got.emplace(e.country, e.topic);
    c.expect(got == expected, "filter case " + std::to_string(trial));
  }

  for (int trial = 0; trial < 300; ++trial) {
    const auto w = random_weights(rng, 6);
    const auto view = netgraph::filter_edges(netgraph::build_bipartite(w), 0.2, true);
    std::vector<std::vector<double>> m(view.countries.size(), std::vector<double>(view.topics.size(), 0.0));
    for (const auto& e : view.edges) m[e.country][e.topic] = e.weight;
    std::vector<std::size_t> present;
    for (std::size_t a = 0; a < view.countries.size(); ++a) {
      if (view.country_present[a]) present.push_back(a);
    }
    std::map<std::pair<std::size_t, std::size_t>, double> got;
    const auto p = netgraph::project_one_mode(view);
    for (const auto& e : p.edges) got[{e.a, e.b}] = e.weight;
    bool ok = p.nodes.size() == present.size();
    for (std::size_t i = 0; ok && i < present.size(); ++i) {
      for (std::size_t j = i + 1; j < present.size(); ++j) {
        double dot = 0.0;
        for (std::size_t t = 0; t < view.topics.size(); ++t) dot += m[present[i]][t] * m[present[j]][t];
        const auto it = got.find({i, j});
        ok = ok && (dot == 0.0 ? it == got.end() : it != got.end() && std::abs(it->second - dot) <= 1e-12 * std::max(1.0, dot));
      }
    }
    c.expect(ok, "projection case " + std::to_string(trial));
  }

  const auto cliques = testsupport::make_graph(
      6, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}, {2, 3, 1}});
  c.expect(netgraph::louvain_communities(cliques, 1.0, topicmodel::kDefaultSeed).community ==
               std::vector<int>{0, 0, 0, 1, 1, 1},
           "two-clique partition at rho=1");
  c.expect(netgraph::louvain_communities(cliques, 100.0, topicmodel::kDefaultSeed).count == 1,
           "one community at rho=100");

  const auto fixtures = testsupport::small_graph_fixtures();
  for (const auto& f : fixtures) {
    int previous = INT32_MAX;
    for (double rho : {0.33, 1.0, 3.0}) {
      const auto found = netgraph::louvain_communities(f.graph, rho, topicmodel::kDefaultSeed);
      const auto best = testsupport::brute_force_modularity(f.graph, rho);
      c.expect(std::abs(found.modularity - best.modularity) <= kModularityTol,
               f.name + " rho=" + fixed(rho, 2) + " Q " + fixed(found.modularity, 5) + " vs " + fixed(best.modularity, 5));
      std::vector<int> singletons(f.graph.nodes.size());
      std::iota(singletons.begin(), singletons.end(), 0);
      c.expect(found.modularity + 1e-12 >= netgraph::modularity(f.graph, singletons, rho), f.name + " vs singletons");
      c.expect(found.count <= previous, f.name + " count monotone");
      previous = found.count;
    }
  }

  for (int trial = 0; trial < 300; ++trial) {
    auto w = random_weights(rng, 7);
    const auto view = netgraph::filter_edges(netgraph::build_bipartite(w), 0.25, true);
    const double factor = std::pow(10.0, 6.0 * u(rng) - 3.0);
    for (auto& row : w.weight) {
      for (auto& v : row) v *= factor;
    }
    const auto scaled = netgraph::filter_edges(netgraph::build_bipartite(w), 0.25, true);
    bool ok = view.country_present == scaled.country_present && view.topic_present == scaled.topic_present;
    for (std::size_t a = 0; ok && a < view.countries.size(); ++a) {
      if (!view.country_present[a]) continue;
      const netgraph::NodeRef node{netgraph::NodeCategory::Country, a};
      ok = std::abs(netgraph::weighted_normalized_degree(view, node) -
                    netgraph::weighted_normalized_degree(scaled, node)) <= 1e-12;
    }
    c.expect(ok, "centrality scale case " + std::to_string(trial));
  }
  c.note("1000 filter cases, 300 projections, " + std::to_string(fixtures.size()) + " graphs vs brute force");
}

void end_to_end_criterion(Checks& c) {
  testsupport::TempDir a("accept-a"), b("accept-b");
  testsupport::PipelineOptions options;
  options.kmin = 2;
  options.kmax = 8;
  const auto ra = testsupport::run_fixture_pipeline(a.path(), options);
  const auto rb = testsupport::run_fixture_pipeline(b.path(), options);
  c.expect(ra.ok, "first run: " + ra.failed_step + " " + ra.last.err);
  c.expect(rb.ok, "second run: " + rb.failed_step + " " + rb.last.err);
  if (!ra.ok || !rb.ok) return;
  const auto sa = testsupport::snapshot(ra.bundle);
  const auto sb = testsupport::snapshot(rb.bundle);
  c.expect(!sa.empty() && sa == sb, "bundles byte-identical");
  c.expect(testsupport::snapshot(a.path()) == testsupport::snapshot(b.path()), "all pipeline outputs identical");

  const service::Service svc(ra.bundle);
  c.expect(svc.ok(), "bundle validates: " + svc.load_error());
  if (!svc.ok()) return;
  const auto& loaded = *svc.bundle();
  const auto& model = loaded.model;
  const std::size_t k = model.num_topics();
  auto get = [&](const std::string& path, const service::Query& query = {}) {
    const auto r = svc.handle("GET", path, query);
    c.expect(r.status == 200, path + " status " + std::to_string(r.status));
    return json::parse(r.body);
  };

  const auto land = get("/api/landscape");
  check_schema(land, kLandscapeSchema, "landscape", c);
  const auto recount = recount_shares(loaded.corpus, model);
  bool shares_ok = land["years"].size() == recount.size();
  for (std::size_t i = 0; shares_ok && i < land["years"].size(); ++i) {
    shares_ok = land["shares"][i].get<std::vector<double>>() == recount.at(land["years"][i].get<int>());
  }
  c.expect(shares_ok, "landscape shares equal recount");

  const auto topics = get("/api/topics");
  check_schema(topics, kTopicsSchema, "topics", c);
  c.expect(topics["topics"].size() == k, "topic count");

  c.expect(loaded.prominence == 0.20, "bundle prominence 0.20");
  for (std::size_t t = 0; t < k; ++t) {
    const auto doc = get("/api/topics/" + std::to_string(t) + "/speeches");
    check_schema(doc, kSpeechesSchema, "speeches", c);
    c.expect(doc["threshold"] == 0.20, "default threshold 0.20");
    std::vector<std::pair<double, std::string>> expected;
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
      const auto* s = loaded.corpus.find(model.doc_ids[d]);
      if (s && !s->excluded && model.theta[d * k + t] > 0.20) expected.emplace_back(-model.theta[d * k + t], s->id);
    }
    std::sort(expected.begin(), expected.end());
    bool same = doc["speeches"].size() == expected.size();
    for (std::size_t i = 0; same && i < expected.size(); ++i) {
      same = doc["speeches"][i]["id"] == expected[i].second && doc["speeches"][i]["score"] == -expected[i].first;
    }
    c.expect(same, "prominent speeches topic " + std::to_string(t));
  }

  for (const auto& s : loaded.corpus.speeches) {
    const auto doc = get("/api/speech/" + s.id);
    check_schema(doc, kSpeechSchema, "speech", c);
    c.expect(doc["text"] == s.text, "speech text " + s.id);
    const auto row = model.doc_index(s.id);
    c.expect(row < 0 ? doc["topic_scores"].is_null()
                     : doc["topic_scores"].get<std::vector<double>>() ==
                           std::vector<double>(model.theta.begin() + row * static_cast<long>(k),
                                               model.theta.begin() + (row + 1) * static_cast<long>(k)),
             "topic scores " + s.id);
  }

  const auto weights = affiliation_weights(loaded.corpus, model);
  for (double level : loaded.levels) {
    for (double rho : loaded.resolutions) {
      const service::Query query{{"level", json(level).dump()}, {"resolution", json(rho).dump()}};
      auto q = query;
      const auto bip = get("/api/network", q);
      check_schema(bip, kNetworkSchema, "network", c);
      std::map<std::pair<std::string, std::string>, double> expected;
      for (std::size_t t = 0; t < k; ++t) {
        double max = 0.0;
        for (const auto& [name, row] : weights) max = std::max(max, row[t]);
        for (const auto& [name, row] : weights) {
          if (row[t] > 0 && row[t] >= level * max) expected[{name, landscape::topic_label(t)}] = row[t];
        }
      }
      bool ok = bip["served"]["level"] == level && bip["served"]["resolution"] == rho &&
                bip["graph"]["edges"].size() == expected.size();
      for (const auto& e : bip["graph"]["edges"]) {
        const auto it = expected.find({e["source"], e["target"]});
        ok = ok && it != expected.end() && std::abs(e["weight"].get<double>() - it->second) <= kWeightTol;
      }
      c.expect(ok, "bipartite edges l=" + fixed(level, 2) + " r=" + fixed(rho, 2));

      // the community field matches a fresh Louvain run on the served graph
      netgraph::WeightedGraph g;
      std::map<std::string, std::size_t> index;
      for (const auto& n : bip["graph"]["nodes"]) {
        index[n["id"]] = g.nodes.size();
        g.nodes.push_back(n["id"]);
      }
      for (const auto& e : bip["graph"]["edges"]) {
        const auto x = index.at(e["source"]), y = index.at(e["target"]);
        g.edges.push_back({std::min(x, y), std::max(x, y), e["weight"].get<double>()});
      }
      if (!g.nodes.empty()) {
        const auto fresh = netgraph::louvain_communities(g, rho, bip["graph"]["meta"]["seed"].get<std::uint64_t>());
        bool same = true;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
          same = same && bip["graph"]["nodes"][i]["community"] == fresh.community[i];
        }
        c.expect(same && std::abs(bip["graph"]["meta"]["modularity"].get<double>() - fresh.modularity) < 1e-12,
                 "communities l=" + fixed(level, 2) + " r=" + fixed(rho, 2));
      }

      q["mode"] = "projection";
      const auto proj = get("/api/network", q);
      check_schema(proj, kNetworkSchema, "projection", c);
      std::map<std::pair<std::string, std::string>, double> dots;
      for (const auto& [x, wx] : weights) {
        for (const auto& [y, wy] : weights) {
          if (!(x < y)) continue;
          double dot = 0.0;
          for (std::size_t t = 0; t < k; ++t) {
            if (expected.contains({x, landscape::topic_label(t)}) && expected.contains({y, landscape::topic_label(t)})) {
              dot += wx[t] * wy[t];
            }
          }
          if (dot > 0) dots[{x, y}] = dot;
        }
      }
      bool proj_ok = proj["graph"]["edges"].size() == dots.size();
      for (const auto& e : proj["graph"]["edges"]) {
        std::string x = e["source"], y = e["target"];
        if (y < x) std::swap(x, y);
        const auto it = dots.find({x, y});
        proj_ok = proj_ok && it != dots.end() && std::abs(e["weight"].get<double>() - it->second) <= kWeightTol;
      }
      c.expect(proj_ok, "projection edges l=" + fixed(level, 2) + " r=" + fixed(rho, 2));
    }
  }

  c.expect(svc.handle("GET", "/api/speech/no-such-id", {}).status == 404, "404 unknown id");
  c.expect(svc.handle("GET", "/api/topics/0/speeches", {{"threshold", "x"}}).status == 400, "400 malformed");
  c.expect(svc.handle("GET", "/api/network", {{"resolution", "-"}}).status == 400, "400 malformed network");
  c.expect(svc.handle("GET", "/api/landscape", {}).body == svc.handle("GET", "/api/landscape", {}).body,
           "repeat calls identical");

  // one request over a real socket
  service::HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  c.expect(port > 0, "bind");
  if (port > 0) {
    std::thread worker([&] { server.listen(); });
    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/api/topics");
    for (int i = 0; !res && i < 100; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      res = client.Get("/api/topics");
    }
    c.expect(res && res->status == 200 && res->body == svc.handle("GET", "/api/topics", {}).body, "http round trip");
    server.stop();
    worker.join();
  }
  c.note("k=" + std::to_string(ra.chosen_k) + ", " + std::to_string(sa.size()) + " bundle files identical");
}

}  // namespace

int main() {
  std::vector<Outcome> outcomes;
  outcomes.push_back(run_criterion("corpus-parsing", kCorpusSeconds, corpus_criterion));
  outcomes.push_back(run_criterion("preprocessing", 0, prep_criterion));
  outcomes.push_back(run_criterion("lda-correctness", kLdaSeconds, lda_criterion));
  outcomes.push_back(run_criterion("model-selection", kSelectSeconds, select_criterion));
  outcomes.push_back(run_criterion("landscape", 0, landscape_criterion));
  outcomes.push_back(run_criterion("network", kNetworkSeconds, network_criterion));
  outcomes.push_back(run_criterion("end-to-end", kEndToEndSeconds, end_to_end_criterion));
  const auto failed = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return !o.pass; });
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << " (" << outcomes.size()
            << " criteria)" << std::endl;
  return failed == 0 ? 0 : 1;
}
