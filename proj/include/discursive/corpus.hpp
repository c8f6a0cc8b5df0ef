#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace discursive::corpus {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  /// Parses YYYY-MM-DD, rejecting impossible calendar dates.
  static std::optional<Date> parse(std::string_view text);
  std::string to_string() const;

  auto operator<=>(const Date&) const = default;
};

struct Attendee {
  std::string name;
  std::string affiliation;
};

struct Protocol {
  std::string id;
  Date date;
  std::string agenda_label;
  std::vector<Attendee> attendees;
  std::string body;
};

enum class ExclusionReason { President, Unresolved };

std::string_view to_string(ExclusionReason reason);
std::optional<ExclusionReason> parse_exclusion_reason(std::string_view text);

struct Speech {
  std::string id;
  std::string protocol_id;
  Date date;
  int year = 0;
  std::string speaker_name;
  std::string affiliation;
  std::string text;
  std::optional<ExclusionReason> excluded;

  bool included() const { return !excluded.has_value(); }
  bool operator==(const Speech&) const = default;
};

/// Speaker name -> affiliation for speakers missing from attendee lists.
class AffiliationOverrides {
 public:
  AffiliationOverrides() = default;

  /// Throws InvalidArgument on duplicate keys or empty values.
  void add(std::string speaker_name, std::string affiliation);
  /// Looks up by normalized surname.
  std::optional<std::string> find(std::string_view speaker_name) const;
  std::size_t size() const { return by_key_.size(); }

  /// `Name | Affiliation` lines; blank lines and `#` comments are skipped.
  static AffiliationOverrides parse(std::string_view text);
  static AffiliationOverrides load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> by_key_;
};

struct CorpusConfig {
  std::set<std::string> accepted_agendas{"Situation in Afghanistan", "Afghanistan"};
  std::optional<Date> window_start;
  std::optional<Date> window_end;
};

/// One speaker turn: the column-0 marker (e.g. "Mr. Khalid (Pakistan):") and
/// everything up to the next marker.
struct Turn {
  std::string marker;
  std::string honorific;
  std::string name;
  std::optional<std::string> marker_affiliation;
  bool is_president = false;
  std::string text;
};

/// `preamble + Σ(marker + text)` reproduces the body byte for byte.
struct SegmentedBody {
  std::string preamble;
  std::vector<Turn> turns;

  std::string reconstruct() const;
};

/// Recognizes a turn marker at the start of `line`; returns its length in
/// bytes (including the trailing colon) or 0.
std::size_t match_turn_marker(std::string_view line);

/// Throws NoTurnsFound when no marker occurs at column 0.
SegmentedBody segment_speeches(std::string_view body);

/// Strips honorific and diacritics, case-folds, keeps the last name token.
std::string normalize_speaker_name(std::string_view name);

/// Attendee list first, then overrides; nullopt means unresolved.
std::optional<std::string> resolve_affiliation(std::string_view speaker_name,
                                               const std::vector<Attendee>& attendees,
                                               const AffiliationOverrides& overrides);

/// Parses the header block only; `body` receives everything after `#body:`.
Protocol parse_protocol_header(std::string_view raw, const CorpusConfig& config = {});

struct ParsedProtocol {
  Protocol protocol;
  std::vector<Speech> speeches;
};

ParsedProtocol parse_protocol(std::string_view raw, const AffiliationOverrides& overrides,
                              const CorpusConfig& config = {});

struct FileFailure {
  std::string file;
  std::string error;
};

struct CorpusStats {
  std::map<int, int> speeches_per_year;
  std::map<std::string, std::map<int, int>> speeches_per_affiliation_year;
  std::map<std::string, int> exclusions;
  std::size_t affiliation_count = 0;
  std::size_t protocol_count = 0;
  std::size_t speech_count = 0;
  std::size_t included_count = 0;
  std::vector<FileFailure> failures;
};

struct Corpus {
  std::vector<Protocol> protocols;
  std::vector<Speech> speeches;
  std::set<std::string> affiliations;

  const Speech* find(std::string_view speech_id) const;
  std::vector<const Speech*> included() const;
};

struct BuildResult {
  Corpus corpus;
  CorpusStats stats;
};

/// Sorted by date, protocol id, then turn ordinal. Per-file errors are
/// collected in the stats; throws NoProtocols only if nothing parses.
BuildResult build_corpus(const std::vector<std::filesystem::path>& protocol_files,
                         const AffiliationOverrides& overrides, const CorpusConfig& config = {});

/// All regular files in `dir`, sorted by name.
std::vector<std::filesystem::path> list_protocol_files(const std::filesystem::path& dir);

CorpusStats compute_stats(const Corpus& corpus);

// JSON-lines serialization: one Speech per line.
std::string to_jsonl(const std::vector<Speech>& speeches);
std::vector<Speech> speeches_from_jsonl(std::string_view text);
/// Rebuilds a Corpus (without protocol bodies) from serialized speeches.
Corpus corpus_from_speeches(std::vector<Speech> speeches);

std::string stats_to_json(const CorpusStats& stats);

}  // namespace discursive::corpus
