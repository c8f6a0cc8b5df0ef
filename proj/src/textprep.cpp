#include "discursive/textprep.hpp"

#include <algorithm>

#include "discursive/error.hpp"
#include "discursive/io.hpp"
#include "unicode.hpp"

namespace discursive::textprep {

namespace fs = std::filesystem;

const std::set<std::string>& default_stopwords() {
  // Standard English list (the NLTK corpus list).
  static const std::set<std::string> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
      "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
      "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
      "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
      "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
      "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
      "for", "with", "about", "against", "between", "into", "through", "during", "before",
      "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
      "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
      "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
      "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s", "t", "can",
      "will", "just", "don", "should", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain",
      "aren", "couldn", "didn", "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn",
      "mustn", "needn", "shan", "shouldn", "wasn", "weren", "won", "wouldn"};
  return words;
}

std::set<std::string> parse_stopwords(std::string_view text) {
  std::set<std::string> words;
  for (const auto& raw : io::lines(text)) {
    auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    words.insert(unicode::fold_case(line));
  }
  return words;
}

std::set<std::string> load_stopwords(const fs::path& path) {
  return parse_stopwords(io::read_file(path));
}

void PrepConfig::validate() const {
  if (min_count < 1) {
    throw Error(ErrorCode::InvalidConfig, "min_count must be >= 1");
  }
  if (min_token_len < 1) {
    throw Error(ErrorCode::InvalidConfig, "min_token_len must be >= 1");
  }
}

std::vector<std::string> preprocess_speech(std::string_view text, const PrepConfig& config) {
  std::vector<std::string> tokens;
  const auto cps = unicode::decode(text);
  const auto min_len = static_cast<std::size_t>(config.min_token_len);

  auto emit = [&](std::string token, std::size_t length) {
    if (length < min_len) return;
    if (config.lemmatizer) token = config.lemmatizer(token);
    if (token.empty() || config.stopwords.contains(token)) return;
    tokens.push_back(std::move(token));
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    if (unicode::is_letter(cps[i])) {
      std::string token;
      std::size_t length = 0;
      while (i < cps.size() && unicode::is_letter(cps[i])) {
        unicode::append_utf8(token, unicode::fold_case(cps[i]));
        ++length;
        ++i;
      }
      emit(std::move(token), length);
    } else if (unicode::is_digit(cps[i])) {
      std::string token;
      while (i < cps.size() && unicode::is_digit(cps[i])) {
        token.push_back(static_cast<char>(cps[i]));
        ++i;
      }
      if (config.keep_numeric) emit(token, token.size());
    } else {
      ++i;
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<long long> counts)
    : terms_(std::move(terms)), counts_(std::move(counts)) {
  if (terms_.size() != counts_.size()) {
    throw Error(ErrorCode::InvalidArgument, "vocabulary terms/counts size mismatch");
  }
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

long long Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<long long>(it->second);
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_lists,
                            const PrepConfig& config) {
  config.validate();
  if (token_lists.empty()) {
    throw Error(ErrorCode::EmptyVocabulary, "no documents");
  }
  std::unordered_map<std::string, long long> counts;
  for (const auto& tokens : token_lists) {
    for (const auto& token : tokens) ++counts[token];
  }
  std::vector<std::pair<std::string, long long>> kept;
  for (auto& [term, count] : counts) {
    if (count >= config.min_count && !config.stopwords.contains(term)) {
      kept.emplace_back(term, count);
    }
  }
  if (kept.empty()) {
    throw Error(ErrorCode::EmptyVocabulary,
                "no term occurs at least " + std::to_string(config.min_count) + " times");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> terms;
  std::vector<long long> term_counts;
  terms.reserve(kept.size());
  term_counts.reserve(kept.size());
  for (auto& [term, count] : kept) {
    terms.push_back(std::move(term));
    term_counts.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(term_counts));
}

long long DocTermMatrix::total_count() const {
  long long total = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) total += row_length(r);
  return total;
}

long long DocTermMatrix::row_length(std::size_t row) const {
  long long total = 0;
  for (const auto& entry : rows.at(row)) total += entry.count;
  return total;
}

DocTermMatrix vectorize(const std::vector<Document>& docs, const Vocabulary& vocabulary) {
  DocTermMatrix dtm;
  dtm.vocabulary = vocabulary;
  for (const auto& doc : docs) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& token : doc.tokens) {
      auto column = vocabulary.index_of(token);
      if (column >= 0) ++counts[static_cast<std::uint32_t>(column)];
    }
    if (counts.empty()) {
      dtm.dropped_docs.push_back(doc.id);
      continue;
    }
    std::vector<Entry> row;
    row.reserve(counts.size());
    for (auto [term, count] : counts) row.push_back({term, count});
    dtm.doc_ids.push_back(doc.id);
    dtm.rows.push_back(std::move(row));
  }
  return dtm;
}

// ---------------------------------------------------------------------------

void save_matrix(const DocTermMatrix& dtm, const fs::path& dir, std::string_view provenance) {
  io::ensure_directory(dir);
  const auto header = io::comment_block(provenance);

  std::string vocab = header + "term,count\n";
  for (std::size_t i = 0; i < dtm.vocabulary.size(); ++i) {
    vocab += dtm.vocabulary.term(i) + "," + std::to_string(dtm.vocabulary.count(i)) + "\n";
  }
  io::write_file(dir / "vocab.csv", vocab);

  std::string triplets = header + "doc_id,term,count\n";
  for (std::size_t r = 0; r < dtm.rows.size(); ++r) {
    for (const auto& entry : dtm.rows[r]) {
      triplets += dtm.doc_ids[r] + "," + dtm.vocabulary.term(entry.term) + "," +
                  std::to_string(entry.count) + "\n";
    }
  }
  io::write_file(dir / "dtm.csv", triplets);

  std::string dropped = header;
  for (const auto& id : dtm.dropped_docs) dropped += id + "\n";
  io::write_file(dir / "dropped.txt", dropped);
}

DocTermMatrix load_matrix(const fs::path& dir) {
  auto vocab_lines = io::data_lines(io::read_file(dir / "vocab.csv"));
  if (vocab_lines.empty() || vocab_lines.front() != "term,count") {
    throw Error(ErrorCode::ParseError, "vocab.csv: missing header");
  }
  std::vector<std::string> terms;
  std::vector<long long> counts;
  for (std::size_t i = 1; i < vocab_lines.size(); ++i) {
    auto fields = io::split(vocab_lines[i], ',');
    if (fields.size() != 2) throw Error(ErrorCode::ParseError, "vocab.csv: bad line " + vocab_lines[i]);
    terms.push_back(fields[0]);
    counts.push_back(io::parse_int(fields[1]));
  }
  DocTermMatrix dtm;
  dtm.vocabulary = Vocabulary(std::move(terms), std::move(counts));

  auto triplet_lines = io::data_lines(io::read_file(dir / "dtm.csv"));
  if (triplet_lines.empty() || triplet_lines.front() != "doc_id,term,count") {
    throw Error(ErrorCode::ParseError, "dtm.csv: missing header");
  }
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 1; i < triplet_lines.size(); ++i) {
    auto fields = io::split(triplet_lines[i], ',');
    if (fields.size() != 3) throw Error(ErrorCode::ParseError, "dtm.csv: bad line " + triplet_lines[i]);
    auto column = dtm.vocabulary.index_of(fields[1]);
    auto count = io::parse_int(fields[2]);
    if (column < 0 || count <= 0) {
      throw Error(ErrorCode::ParseError, "dtm.csv: invalid entry " + triplet_lines[i]);
    }
    auto [it, inserted] = row_of.emplace(fields[0], dtm.rows.size());
    if (inserted) {
      dtm.doc_ids.push_back(fields[0]);
      dtm.rows.emplace_back();
    }
    dtm.rows[it->second].push_back(
        {static_cast<std::uint32_t>(column), static_cast<std::uint32_t>(count)});
  }
  for (auto& row : dtm.rows) {
    std::sort(row.begin(), row.end(), [](auto a, auto b) { return a.term < b.term; });
  }
  dtm.dropped_docs = io::data_lines(io::read_file(dir / "dropped.txt"));
  return dtm;
}

}  // namespace discursive::textprep
