#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace discursive::textprep {

using Lemmatizer = std::function<std::string(std::string_view)>;

/// The built-in English stop-word list.
const std::set<std::string>& default_stopwords();

/// One term per line; blank lines and `#` comments are ignored.
std::set<std::string> parse_stopwords(std::string_view text);
std::set<std::string> load_stopwords(const std::filesystem::path& path);

struct PrepConfig {
  std::set<std::string> stopwords = default_stopwords();
  int min_count = 3;
  int min_token_len = 2;
  /// Admits pure-digit tokens such as years.
  bool keep_numeric = false;
  /// Identity when empty.
  Lemmatizer lemmatizer;

  void validate() const;
};

/// Case-folded alphabetic tokens, lemmatized, stop-words and short tokens
/// removed, in text order.
std::vector<std::string> preprocess_speech(std::string_view text, const PrepConfig& config);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// `terms` and `counts` in column order. Throws InvalidArgument on
  /// duplicates or size mismatch.
  Vocabulary(std::vector<std::string> terms, std::vector<long long> counts);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<long long>& counts() const { return counts_; }
  const std::string& term(std::size_t column) const { return terms_.at(column); }
  long long count(std::size_t column) const { return counts_.at(column); }
  /// Column index, or -1 when absent.
  long long index_of(std::string_view term) const;

 private:
  std::vector<std::string> terms_;
  std::vector<long long> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Drops terms with corpus-wide frequency below `min_count` and orders the
/// rest by descending count, then lexicographically. Throws EmptyVocabulary.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_lists,
                            const PrepConfig& config);

struct Entry {
  std::uint32_t term;
  std::uint32_t count;
  bool operator==(const Entry&) const = default;
};

/// Sparse document-term counts. Rows hold entries sorted by term column.
struct DocTermMatrix {
  std::vector<std::string> doc_ids;
  std::vector<std::vector<Entry>> rows;
  std::vector<std::string> dropped_docs;
  Vocabulary vocabulary;

  std::size_t num_docs() const { return rows.size(); }
  std::size_t num_terms() const { return vocabulary.size(); }
  long long total_count() const;
  long long row_length(std::size_t row) const;
};

struct Document {
  std::string id;
  std::vector<std::string> tokens;
};

/// Rows follow `docs` order; documents left empty after pruning go to
/// `dropped_docs`.
DocTermMatrix vectorize(const std::vector<Document>& docs, const Vocabulary& vocabulary);

// Serialization: `dtm.csv` triplets (doc_id,term,count), `vocab.csv`
// (term,count), `dropped.txt`. Lines starting with '#' carry provenance.
void save_matrix(const DocTermMatrix& dtm, const std::filesystem::path& dir,
                 std::string_view provenance_comment = {});
DocTermMatrix load_matrix(const std::filesystem::path& dir);

}  // namespace discursive::textprep
