#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "discursive/error.hpp"
#include "discursive/topicmodel.hpp"
#include "planted.hpp"

using namespace discursive;
using namespace discursive::topicmodel;
namespace dt = discursive::textprep;

namespace {

dt::DocTermMatrix tiny_matrix() {
  const std::vector<dt::Document> docs{
      {"a", {"x", "x", "y"}}, {"b", {"y", "z", "z", "z"}}, {"c", {"x", "z"}}};
  return dt::vectorize(docs, dt::Vocabulary({"x", "y", "z"}, {3, 2, 4}));
}

LdaConfig quick(int k, int iterations = 200) {
  LdaConfig config;
  config.k = k;
  config.iterations = iterations;
  config.burn_in = iterations / 5;
  return config;
}

testsupport::PlantedCorpus small_planted() {
  testsupport::PlantedSpec spec;
  spec.docs = 60;
  spec.tokens_per_doc = 60;
  spec.words_per_topic = 10;
  return testsupport::make_planted(spec);
}

}  // namespace

TEST(LdaConfig, DefaultsFollowConvention) {
  LdaConfig config;
  EXPECT_EQ(config.k, 10);
  EXPECT_DOUBLE_EQ(config.resolved_alpha(), 5.0);
  EXPECT_DOUBLE_EQ(config.beta, 0.01);
  EXPECT_EQ(config.iterations, 1000);
  EXPECT_EQ(config.burn_in, 200);
  EXPECT_EQ(config.seed, 2017u);
}

TEST(LdaConfig, Validation) {
  auto bad = [](auto mutate) {
    LdaConfig c;
    mutate(c);
    try {
      c.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidConfig;
    }
    return false;
  };
  EXPECT_TRUE(bad([](LdaConfig& c) { c.k = 0; }));
  EXPECT_TRUE(bad([](LdaConfig& c) { c.alpha = 0.0; }));
  EXPECT_TRUE(bad([](LdaConfig& c) { c.beta = -1.0; }));
  EXPECT_TRUE(bad([](LdaConfig& c) { c.iterations = 0; }));
  EXPECT_TRUE(bad([](LdaConfig& c) { c.burn_in = 1000; }));
  EXPECT_TRUE(bad([](LdaConfig& c) { c.average_last_m = 900; }));
  EXPECT_NO_THROW(LdaConfig{}.validate());
}

TEST(LdaConfig, TextRoundTrip) {
  LdaConfig c;
  c.k = 7;
  c.alpha = 0.3;
  c.beta = 0.05;
  c.seed = 99;
  c.average_last_m = 10;
  const auto back = LdaConfig::from_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.k, 7);
  EXPECT_DOUBLE_EQ(back.resolved_alpha(), 0.3);
}

TEST(Fit, EmptyMatrixThrows) {
  dt::DocTermMatrix empty;
  try {
    fit_lda(empty, quick(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMatrix);
  }
}

TEST(Fit, RowsAreDistributions) {
  const auto pc = small_planted();
  for (int k : {1, 2, 3, 5}) {
    const auto model = fit_lda(pc.dtm, quick(k, 100));
    for (std::size_t d = 0; d < model.num_docs(); ++d) {
      auto row = model.theta_row(d);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
    }
    for (std::size_t t = 0; t < model.num_topics(); ++t) {
      auto row = model.phi_row(t);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
      EXPECT_TRUE(std::all_of(row.begin(), row.end(), [](double v) { return v > 0.0; }));
    }
  }
}

TEST(Fit, SeedDeterminismIsBitwise) {
  const auto pc = small_planted();
  const auto a = fit_lda(pc.dtm, quick(3, 80));
  const auto b = fit_lda(pc.dtm, quick(3, 80));
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.phi, b.phi);
  auto other = quick(3, 80);
  other.seed = 1;
  EXPECT_NE(fit_lda(pc.dtm, other).z, a.z);
}

// With one topic every token is assigned to it, so phi is the smoothed
// corpus frequency and theta is 1.
TEST(Fit, SingleTopicCollapse) {
  const auto dtm = tiny_matrix();
  const auto model = fit_lda(dtm, quick(1, 20));
  const double beta = 0.01;
  const double n = static_cast<double>(dtm.total_count());
  const double v = static_cast<double>(dtm.num_terms());
  for (std::size_t w = 0; w < dtm.num_terms(); ++w) {
    const double expected = (static_cast<double>(dtm.vocabulary.count(w)) + beta) / (n + v * beta);
    EXPECT_DOUBLE_EQ(model.phi[w], expected);
  }
  for (double t : model.theta) EXPECT_DOUBLE_EQ(t, 1.0);
  EXPECT_TRUE(std::all_of(model.z.begin(), model.z.end(), [](auto z) { return z == 0; }));
}

TEST(Sampler, CountsStayConsistent) {
  const auto pc = small_planted();
  GibbsSampler sampler(pc.dtm, quick(4, 50));
  sampler.verify_counts();
  for (int i = 0; i < 25; ++i) {
    sampler.sweep();
    ASSERT_NO_THROW(sampler.verify_counts());
  }
  EXPECT_EQ(sampler.sweeps_done(), 25);
  EXPECT_EQ(sampler.assignments().size(), static_cast<std::size_t>(pc.dtm.total_count()));
}

// The chain's long-run state frequencies must match the exact collapsed
// posterior p(z | w), enumerated over all k^N assignments of a tiny corpus.
TEST(Sampler, StationaryDistributionMatchesExactPosterior) {
  const std::vector<dt::Document> docs{{"a", {"x", "y"}}, {"b", {"y", "y"}}};
  const auto dtm = dt::vectorize(docs, dt::Vocabulary({"x", "y"}, {1, 3}));
  // token layout: doc a -> (x, y), doc b -> (y, y)
  const std::vector<int> doc_of{0, 0, 1, 1};
  const std::vector<int> word_of{0, 1, 1, 1};
  const int k = 2, n = 4, v = 2;
  const double alpha = 0.7, beta = 0.4;

  std::vector<double> exact(1 << n);
  for (int state = 0; state < (1 << n); ++state) {
    std::vector<std::vector<int>> ndt(2, std::vector<int>(k)), ntw(k, std::vector<int>(v));
    std::vector<int> nt(k), nd(2);
    for (int i = 0; i < n; ++i) {
      const int z = (state >> i) & 1;
      ++ndt[doc_of[i]][z];
      ++ntw[z][word_of[i]];
      ++nt[z];
      ++nd[doc_of[i]];
    }
    double log_p = 0.0;
    for (int d = 0; d < 2; ++d) {
      for (int t = 0; t < k; ++t) log_p += std::lgamma(ndt[d][t] + alpha);
      log_p -= std::lgamma(nd[d] + k * alpha);
    }
    for (int t = 0; t < k; ++t) {
      for (int w = 0; w < v; ++w) log_p += std::lgamma(ntw[t][w] + beta);
      log_p -= std::lgamma(nt[t] + v * beta);
    }
    exact[state] = std::exp(log_p);
  }
  const double total = std::accumulate(exact.begin(), exact.end(), 0.0);
  for (double& p : exact) p /= total;

  LdaConfig config = quick(k, 10);
  config.alpha = alpha;
  config.beta = beta;
  GibbsSampler sampler(dtm, config);
  std::vector<double> seen(1 << n, 0.0);
  const int sweeps = 200000;
  for (int s = 0; s < 100; ++s) sampler.sweep();
  for (int s = 0; s < sweeps; ++s) {
    sampler.sweep();
    const auto& z = sampler.assignments();
    int state = 0;
    for (int i = 0; i < n; ++i) state |= static_cast<int>(z[i]) << i;
    seen[state] += 1.0 / sweeps;
  }
  EXPECT_LT(testsupport::total_variation(seen, exact), 0.01);
}

TEST(Fit, DocumentOrderDoesNotMatter) {
  const auto pc = small_planted();
  auto permuted = pc.dtm;
  std::vector<std::size_t> order(permuted.num_docs());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::rotate(order.begin(), order.begin() + 7, order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    permuted.doc_ids[i] = pc.dtm.doc_ids[order[i]];
    permuted.rows[i] = pc.dtm.rows[order[i]];
  }
  const auto a = fit_lda(pc.dtm, quick(3, 60));
  const auto b = fit_lda(permuted, quick(3, 60));
  EXPECT_EQ(a.phi, b.phi);
  for (std::size_t d = 0; d < a.num_docs(); ++d) {
    const auto row = b.doc_index(a.doc_ids[d]);
    ASSERT_GE(row, 0);
    auto ta = a.theta_row(d);
    auto tb = b.theta_row(static_cast<std::size_t>(row));
    EXPECT_TRUE(std::equal(ta.begin(), ta.end(), tb.begin()));
  }
}

TEST(Fit, RecoversSmallPlantedTopics) {
  const auto pc = small_planted();
  const auto model = fit_lda(pc.dtm, quick(3, 300));
  std::vector<int> perm{0, 1, 2};
  double best = 1e9;
  do {
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      auto row = model.phi_row(static_cast<std::size_t>(perm[t]));
      worst = std::max(worst, testsupport::total_variation({row.begin(), row.end()}, pc.planted[t]));
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_LT(best, 0.1);
}

TEST(Fit, AveragingKeepsNormalization) {
  const auto pc = small_planted();
  auto config = quick(3, 100);
  config.average_last_m = 20;
  const auto model = fit_lda(pc.dtm, config);
  for (std::size_t t = 0; t < 3; ++t) {
    auto row = model.phi_row(t);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  }
  EXPECT_NE(model.phi, fit_lda(pc.dtm, quick(3, 100)).phi);
}

TEST(TopWords, OrderTiesAndClamp) {
  TopicModel model;
  model.config.k = 2;
  model.terms = {"delta", "alpha", "charlie", "bravo"};
  model.phi = {0.1, 0.4, 0.1, 0.4, 0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(top_words(model, 0, 3), (std::vector<std::string>{"alpha", "bravo", "charlie"}));
  EXPECT_EQ(top_words(model, 1, 25).size(), 4u);
  EXPECT_EQ(top_words(model, 1, 2), (std::vector<std::string>{"alpha", "bravo"}));
  try {
    top_words(model, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TopicOutOfRange);
  }
  EXPECT_THROW(top_words(model, -1), Error);
}

TEST(LogLikelihood, MatchesDirectSum) {
  const auto dtm = tiny_matrix();
  const auto model = fit_lda(dtm, quick(2, 50));
  double expected = 0.0;
  for (std::size_t d = 0; d < dtm.num_docs(); ++d) {
    for (const auto& e : dtm.rows[d]) {
      double p = 0.0;
      for (std::size_t t = 0; t < 2; ++t) p += model.theta_row(d)[t] * model.phi_row(t)[e.term];
      expected += e.count * std::log(p);
    }
  }
  EXPECT_NEAR(log_likelihood(model, dtm), expected, 1e-9);
  EXPECT_LT(log_likelihood(model, dtm), 0.0);

  auto other = dtm;
  other.doc_ids[0] = "renamed";
  try {
    log_likelihood(model, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelMatrixMismatch);
  }
}

TEST(Persistence, SaveLoadIsExact) {
  const auto pc = small_planted();
  const auto model = fit_lda(pc.dtm, quick(3, 40));
  testsupport::TempDir dir("model");
  save_model(model, dir.path(), "fit test");
  const auto back = load_model(dir.path());
  EXPECT_EQ(back.config.to_text(), model.config.to_text());
  EXPECT_EQ(back.doc_ids, model.doc_ids);
  EXPECT_EQ(back.terms, model.terms);
  EXPECT_EQ(back.z, model.z);
  EXPECT_EQ(back.theta, model.theta);
  EXPECT_EQ(back.phi, model.phi);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "topwords.json"));
}
