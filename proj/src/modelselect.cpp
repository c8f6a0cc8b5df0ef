#include "discursive/modelselect.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <json.hpp>
#include <numbers>
#include <numeric>
#include <set>

#include "discursive/error.hpp"
#include "discursive/io.hpp"

namespace discursive::modelselect {

using json = nlohmann::ordered_json;

namespace {

constexpr double kSumTolerance = 1e-9;

void check_distribution(std::span<const double> p, const char* name) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::NotADistribution, std::string(name) + " has a negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::NotADistribution,
                std::string(name) + " sums to " + io::format_double(sum));
  }
}

// Half of KL(p || m) restricted to p's support.
double half_kl_to_mixture(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      const double m = 0.5 * (p[i] + q[i]);
      total += p[i] * std::log(p[i] / m);
    }
  }
  return 0.5 * total;
}

std::vector<std::size_t> top_indices(std::span<const double> row, std::size_t n) {
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  n = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return a < b;
                    });
  order.resize(n);
  return order;
}

double pair_divergence(std::span<const double> p, std::span<const double> q,
                       const DeveaudOptions& options) {
  if (!options.top_n) return jensen_shannon(p, q);
  if (p.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "rows differ in length");

  std::set<std::size_t> support;
  for (auto i : top_indices(p, *options.top_n)) support.insert(i);
  for (auto i : top_indices(q, *options.top_n)) support.insert(i);
  std::vector<double> ps;
  std::vector<double> qs;
  double p_mass = 0.0;
  double q_mass = 0.0;
  for (auto i : support) {
    ps.push_back(p[i]);
    qs.push_back(q[i]);
    p_mass += p[i];
    q_mass += q[i];
  }
  if (!(p_mass > 0.0) || !(q_mass > 0.0)) {
    throw Error(ErrorCode::NotADistribution, "no mass on the top-n support");
  }
  for (auto& v : ps) v /= p_mass;
  for (auto& v : qs) v /= q_mass;
  return jensen_shannon(ps, qs);
}

}  // namespace

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
  check_distribution(p, "p");
  check_distribution(q, "q");
  const double jsd = half_kl_to_mixture(p, q) + half_kl_to_mixture(q, p);
  return std::clamp(jsd, 0.0, std::numbers::ln2);
}

double deveaud_score(const std::vector<std::vector<double>>& phi_rows,
                     const DeveaudOptions& options) {
  const std::size_t k = phi_rows.size();
  if (k < 2) throw Error(ErrorCode::SingleTopic, "need at least two topics");
  double total = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      total += pair_divergence(phi_rows[a], phi_rows[b], options);
    }
  }
  return 2.0 * total / static_cast<double>(k * (k - 1));
}

double deveaud_score(const topicmodel::TopicModel& model, const DeveaudOptions& options) {
  std::vector<std::vector<double>> rows;
  rows.reserve(model.num_topics());
  for (std::size_t t = 0; t < model.num_topics(); ++t) {
    auto row = model.phi_row(t);
    rows.emplace_back(row.begin(), row.end());
  }
  return deveaud_score(rows, options);
}

std::uint64_t seed_for_k(std::uint64_t base_seed, int k) {
  return base_seed ^ static_cast<std::uint64_t>(k);
}

DeveaudScan scan_k(const textprep::DocTermMatrix& dtm, const std::vector<int>& k_range,
                   const topicmodel::LdaConfig& base, const ScanOptions& options) {
  if (k_range.empty()) throw Error(ErrorCode::EmptyScan, "empty k range");
  for (std::size_t i = 1; i < k_range.size(); ++i) {
    if (k_range[i] <= k_range[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "k range must be strictly ascending");
    }
  }

  struct Outcome {
    std::optional<double> score;
    std::optional<topicmodel::TopicModel> model;
    std::string error;
  };
  auto run_one = [&](int k) {
    Outcome outcome;
    try {
      topicmodel::LdaConfig config = base;
      config.k = k;
      config.seed = seed_for_k(base.seed, k);
      auto model = topicmodel::fit_lda(dtm, config);
      outcome.score = deveaud_score(model, options.deveaud);
      if (options.keep_models) outcome.model = std::move(model);
    } catch (const Error& e) {
      outcome.error = e.what();
    }
    return outcome;
  };

  std::vector<Outcome> outcomes;
  outcomes.reserve(k_range.size());
  if (options.parallel) {
    std::vector<std::future<Outcome>> futures;
    for (int k : k_range) futures.push_back(std::async(std::launch::async, run_one, k));
    for (auto& f : futures) outcomes.push_back(f.get());
  } else {
    for (int k : k_range) outcomes.push_back(run_one(k));
  }

  DeveaudScan scan;
  scan.base_config = base;
  scan.options = options.deveaud;
  for (std::size_t i = 0; i < k_range.size(); ++i) {
    auto& outcome = outcomes[i];
    if (!outcome.score) {
      scan.failures.push_back({k_range[i], outcome.error});
      continue;
    }
    scan.k_values.push_back(k_range[i]);
    scan.scores.push_back(*outcome.score);
    if (outcome.model) scan.models.push_back(std::move(*outcome.model));
  }
  if (scan.k_values.empty()) {
    throw Error(ErrorCode::ScanFailed, "every k failed; first error: " + scan.failures.front().error);
  }
  return scan;
}

int select_first_local_peak(const std::vector<int>& k_values, const std::vector<double>& scores) {
  if (k_values.empty()) throw Error(ErrorCode::EmptyScan, "no scores to choose from");
  if (k_values.size() != scores.size()) {
    throw Error(ErrorCode::DimensionMismatch, "k values and scores differ in length");
  }
  const std::size_t last = scores.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    const bool rises = i == 0 || scores[i] > scores[i - 1];
    const bool holds = i == last || scores[i] >= scores[i + 1];
    if (rises && holds) return k_values[i];
  }
  return k_values[last];
}

int select_first_local_peak(const DeveaudScan& scan) {
  return select_first_local_peak(scan.k_values, scan.scores);
}

std::string scan_to_csv(const DeveaudScan& scan, int chosen_k, std::string_view provenance) {
  std::string out = io::comment_block(provenance) + "k,score\n";
  for (std::size_t i = 0; i < scan.k_values.size(); ++i) {
    out += std::to_string(scan.k_values[i]) + "," + io::format_double(scan.scores[i]) + "\n";
  }
  out += "chosen_k," + std::to_string(chosen_k) + "\n";
  return out;
}

std::string scan_to_json(const DeveaudScan& scan, int chosen_k) {
  json out;
  out["schema_version"] = 1;
  out["k"] = scan.k_values;
  out["score"] = scan.scores;
  out["chosen_k"] = chosen_k;
  json failures = json::array();
  for (const auto& failure : scan.failures) {
    failures.push_back({{"k", failure.k}, {"error", failure.error}});
  }
  out["failures"] = failures;
  out["seed"] = scan.base_config.seed;
  if (scan.options.top_n) out["top_n"] = *scan.options.top_n;
  return out.dump(2) + "\n";
}

}  // namespace discursive::modelselect
