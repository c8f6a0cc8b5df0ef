#include "discursive/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <array>
#include <cstdio>
#include <json.hpp>

#include "discursive/error.hpp"
#include "discursive/io.hpp"
#include "unicode.hpp"

namespace discursive::corpus {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 6> kHonorifics = {"Mr.", "Mrs.", "Ms.", "Dr.", "Sir",
                                                         "Baroness"};
constexpr std::array<std::string_view, 12> kNameParticles = {
    "de", "del", "van", "der", "von", "al", "bin", "la", "le", "du", "da", "di"};
constexpr std::string_view kPresident = "The President";
constexpr std::size_t kMaxNameTokens = 6;

bool starts_with_upper(std::string_view token) {
  if (token.empty()) return false;
  auto first = static_cast<unsigned char>(token[0]);
  if (first < 0x80) return first >= 'A' && first <= 'Z';
  auto cps = unicode::decode(token.substr(0, std::min<std::size_t>(4, token.size())));
  return !cps.empty() && unicode::is_letter(cps[0]) && unicode::fold_case(cps[0]) != cps[0];
}

bool valid_name_token(std::string_view token) {
  if (token.empty()) return false;
  if (std::find(kNameParticles.begin(), kNameParticles.end(), token) != kNameParticles.end()) {
    return true;
  }
  if (!starts_with_upper(token)) return false;
  for (char c : token) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x80) continue;
    if (!(std::isalpha(u) || c == '-' || c == '\'' || c == '.')) return false;
  }
  return true;
}

struct MarkerParts {
  std::size_t length = 0;
  std::string honorific;
  std::string name;
  std::optional<std::string> affiliation;
  bool president = false;
};

// Parses an optional " (Affiliation)" followed by ':' starting at `pos`.
std::optional<std::size_t> parse_marker_tail(std::string_view line, std::size_t pos,
                                             std::optional<std::string>& affiliation) {
  if (pos < line.size() && line[pos] == ':') {
    return pos + 1;
  }
  if (line.substr(pos, 2) != " (") return std::nullopt;
  auto close = line.find(')', pos + 2);
  if (close == std::string_view::npos || close + 1 >= line.size() || line[close + 1] != ':') {
    return std::nullopt;
  }
  auto inner = io::trim(line.substr(pos + 2, close - pos - 2));
  if (inner.empty()) return std::nullopt;
  affiliation = std::string(inner);
  return close + 2;
}

std::optional<MarkerParts> parse_marker(std::string_view line) {
  MarkerParts parts;
  if (line.starts_with(kPresident)) {
    std::optional<std::string> ignored;
    auto end = parse_marker_tail(line, kPresident.size(), ignored);
    if (!end) return std::nullopt;
    parts.length = *end;
    parts.name = std::string(kPresident);
    parts.president = true;
    return parts;
  }
  for (auto honorific : kHonorifics) {
    if (!line.starts_with(honorific) || line.size() <= honorific.size() ||
        line[honorific.size()] != ' ') {
      continue;
    }
    std::size_t pos = honorific.size() + 1;
    std::size_t tokens = 0;
    while (pos < line.size() && tokens < kMaxNameTokens) {
      auto end = line.find_first_of(" :", pos);
      if (end == std::string_view::npos) return std::nullopt;
      if (!valid_name_token(line.substr(pos, end - pos))) return std::nullopt;
      ++tokens;
      std::optional<std::string> affiliation;
      if (auto tail = parse_marker_tail(line, end, affiliation)) {
        parts.length = *tail;
        parts.honorific = std::string(honorific);
        parts.name = std::string(line.substr(honorific.size() + 1, end - honorific.size() - 1));
        parts.affiliation = std::move(affiliation);
        return parts;
      }
      if (line[end] != ' ') return std::nullopt;
      pos = end + 1;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::string pad_ordinal(std::size_t ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", ordinal);
  return buf;
}

std::string header_value(std::string_view line, std::string_view key) {
  return std::string(io::trim(line.substr(key.size())));
}

bool in_window(const Date& date, const CorpusConfig& config) {
  if (config.window_start && date < *config.window_start) return false;
  if (config.window_end && date > *config.window_end) return false;
  return true;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  text = io::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
  }
  Date d;
  d.year = static_cast<int>(io::parse_int(text.substr(0, 4)));
  d.month = static_cast<int>(io::parse_int(text.substr(5, 2)));
  d.day = static_cast<int>(io::parse_int(text.substr(8, 2)));
  static constexpr std::array<int, 12> kDays = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > kDays[d.month - 1]) return std::nullopt;
  const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  if (d.month == 2 && d.day == 29 && !leap) return std::nullopt;
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::President: return "president";
    case ExclusionReason::Unresolved: return "unresolved";
  }
  return "unknown";
}

std::optional<ExclusionReason> parse_exclusion_reason(std::string_view text) {
  if (text == "president") return ExclusionReason::President;
  if (text == "unresolved") return ExclusionReason::Unresolved;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Overrides

void AffiliationOverrides::add(std::string speaker_name, std::string affiliation) {
  auto key = normalize_speaker_name(speaker_name);
  if (key.empty()) {
    throw Error(ErrorCode::InvalidArgument, "override with empty speaker name");
  }
  if (io::trim(affiliation).empty()) {
    throw Error(ErrorCode::InvalidArgument, "override for '" + speaker_name + "' has no affiliation");
  }
  if (!by_key_.emplace(key, std::string(io::trim(affiliation))).second) {
    throw Error(ErrorCode::InvalidArgument, "duplicate override for '" + speaker_name + "'");
  }
}

std::optional<std::string> AffiliationOverrides::find(std::string_view speaker_name) const {
  auto it = by_key_.find(normalize_speaker_name(speaker_name));
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

AffiliationOverrides AffiliationOverrides::parse(std::string_view text) {
  AffiliationOverrides overrides;
  for (const auto& raw : io::lines(text)) {
    auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto bar = line.find('|');
    if (bar == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "override line without '|': " + std::string(line));
    }
    overrides.add(std::string(io::trim(line.substr(0, bar))),
                  std::string(io::trim(line.substr(bar + 1))));
  }
  return overrides;
}

AffiliationOverrides AffiliationOverrides::load(const fs::path& path) {
  return parse(io::read_file(path));
}

// ---------------------------------------------------------------------------
// Segmentation and resolution

std::string SegmentedBody::reconstruct() const {
  std::string out = preamble;
  for (const auto& turn : turns) {
    out += turn.marker;
    out += turn.text;
  }
  return out;
}

std::size_t match_turn_marker(std::string_view line) {
  auto eol = line.find('\n');
  auto parts = parse_marker(line.substr(0, eol));
  return parts ? parts->length : 0;
}

SegmentedBody segment_speeches(std::string_view body) {
  struct Hit {
    std::size_t start;
    MarkerParts parts;
  };
  std::vector<Hit> hits;
  std::size_t line_start = 0;
  while (line_start < body.size()) {
    auto eol = body.find('\n', line_start);
    auto line = body.substr(line_start, eol == std::string_view::npos ? std::string_view::npos
                                                                      : eol - line_start);
    if (auto parts = parse_marker(line)) {
      hits.push_back({line_start, std::move(*parts)});
    }
    if (eol == std::string_view::npos) break;
    line_start = eol + 1;
  }
  if (hits.empty()) {
    throw Error(ErrorCode::NoTurnsFound, "no speaker turn marker at column 0");
  }

  SegmentedBody out;
  out.preamble = std::string(body.substr(0, hits.front().start));
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto& hit = hits[i];
    const std::size_t text_begin = hit.start + hit.parts.length;
    const std::size_t text_end = i + 1 < hits.size() ? hits[i + 1].start : body.size();
    Turn turn;
    turn.marker = std::string(body.substr(hit.start, hit.parts.length));
    turn.honorific = hit.parts.honorific;
    turn.name = hit.parts.name;
    turn.marker_affiliation = hit.parts.affiliation;
    turn.is_president = hit.parts.president;
    turn.text = std::string(body.substr(text_begin, text_end - text_begin));
    out.turns.push_back(std::move(turn));
  }
  return out;
}

std::string normalize_speaker_name(std::string_view name) {
  name = io::trim(name);
  if (auto paren = name.find(" ("); paren != std::string_view::npos) {
    name = name.substr(0, paren);
  }
  while (!name.empty() && (name.back() == ':' || name.back() == ',')) {
    name.remove_suffix(1);
  }
  for (auto honorific : kHonorifics) {
    if (name.starts_with(honorific) && name.size() > honorific.size() &&
        name[honorific.size()] == ' ') {
      name.remove_prefix(honorific.size() + 1);
      break;
    }
  }
  auto folded = unicode::fold_and_strip(io::trim(name));
  auto tokens = io::split(folded, ' ');
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (!it->empty()) return *it;
  }
  return {};
}

std::optional<std::string> resolve_affiliation(std::string_view speaker_name,
                                               const std::vector<Attendee>& attendees,
                                               const AffiliationOverrides& overrides) {
  const auto key = normalize_speaker_name(speaker_name);
  if (key.empty()) return std::nullopt;
  for (const auto& attendee : attendees) {
    if (normalize_speaker_name(attendee.name) == key) {
      return attendee.affiliation;
    }
  }
  return overrides.find(speaker_name);
}

// ---------------------------------------------------------------------------
// Protocol parsing

Protocol parse_protocol_header(std::string_view raw, const CorpusConfig& config) {
  Protocol protocol;
  bool have_id = false;
  bool have_date = false;
  bool have_agenda = false;
  bool in_attendees = false;
  std::set<std::string> seen_names;

  std::size_t pos = 0;
  while (pos < raw.size()) {
    auto eol = raw.find('\n', pos);
    std::string_view line =
        raw.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t next = eol == std::string_view::npos ? raw.size() : eol + 1;

    if (line.starts_with("#body:")) {
      if (!have_id || !have_date) {
        throw Error(ErrorCode::MalformedHeader, have_id ? "missing #date" : "missing #id");
      }
      if (!have_agenda) {
        throw Error(ErrorCode::MalformedHeader, "missing #agenda in " + protocol.id);
      }
      protocol.body = std::string(raw.substr(next));
      if (!in_window(protocol.date, config)) {
        throw Error(ErrorCode::DateOutsideWindow,
                    protocol.id + " dated " + protocol.date.to_string());
      }
      return protocol;
    }

    if (line.starts_with("#id:")) {
      protocol.id = header_value(line, "#id:");
      have_id = !protocol.id.empty();
      if (!have_id) throw Error(ErrorCode::MalformedHeader, "empty #id");
    } else if (line.starts_with("#date:")) {
      auto date = Date::parse(header_value(line, "#date:"));
      if (!date) throw Error(ErrorCode::MalformedHeader, "bad #date: " + std::string(line));
      protocol.date = *date;
      have_date = true;
    } else if (line.starts_with("#agenda:")) {
      protocol.agenda_label = header_value(line, "#agenda:");
      have_agenda = true;
    } else if (line.starts_with("#attendees:")) {
      in_attendees = true;
    } else if (in_attendees) {
      auto entry = io::trim(line);
      if (!entry.empty()) {
        auto bar = entry.find('|');
        if (bar == std::string_view::npos) {
          throw Error(ErrorCode::MalformedHeader, "attendee line without '|': " + std::string(entry));
        }
        Attendee attendee{std::string(io::trim(entry.substr(0, bar))),
                          std::string(io::trim(entry.substr(bar + 1)))};
        if (attendee.name.empty() || attendee.affiliation.empty()) {
          throw Error(ErrorCode::MalformedHeader, "incomplete attendee: " + std::string(entry));
        }
        if (!seen_names.insert(attendee.name).second) {
          throw Error(ErrorCode::MalformedHeader, "duplicate attendee: " + attendee.name);
        }
        protocol.attendees.push_back(std::move(attendee));
      }
    } else if (!io::trim(line).empty()) {
      throw Error(ErrorCode::MalformedHeader, "unexpected header line: " + std::string(line));
    }
    pos = next;
  }
  if (!have_id || !have_date) {
    throw Error(ErrorCode::MalformedHeader, have_id ? "missing #date" : "missing #id");
  }
  throw Error(ErrorCode::UnterminatedHeader, "no #body: line in " + protocol.id);
}

ParsedProtocol parse_protocol(std::string_view raw, const AffiliationOverrides& overrides,
                              const CorpusConfig& config) {
  ParsedProtocol parsed;
  parsed.protocol = parse_protocol_header(raw, config);
  const auto& protocol = parsed.protocol;
  if (!config.accepted_agendas.contains(protocol.agenda_label)) {
    throw Error(ErrorCode::AgendaMismatch, protocol.id + ": '" + protocol.agenda_label + "'");
  }

  auto segmented = segment_speeches(protocol.body);
  std::size_t ordinal = 0;
  for (auto& turn : segmented.turns) {
    Speech speech;
    speech.id = protocol.id + "_" + pad_ordinal(++ordinal);
    speech.protocol_id = protocol.id;
    speech.date = protocol.date;
    speech.year = protocol.date.year;
    speech.text = std::string(io::trim(turn.text));

    if (turn.is_president) {
      speech.speaker_name = turn.name;
      speech.affiliation = resolve_affiliation("President", protocol.attendees, overrides)
                               .value_or("President");
      speech.excluded = ExclusionReason::President;
    } else {
      speech.speaker_name = turn.honorific + " " + turn.name;
      auto affiliation = resolve_affiliation(speech.speaker_name, protocol.attendees, overrides);
      if (!affiliation && turn.marker_affiliation) {
        affiliation = turn.marker_affiliation;
      }
      if (affiliation) {
        speech.affiliation = *affiliation;
      } else {
        speech.excluded = ExclusionReason::Unresolved;
      }
    }
    if (speech.included() && speech.text.empty()) {
      throw Error(ErrorCode::ParseError, "empty speech " + speech.id);
    }
    parsed.speeches.push_back(std::move(speech));
  }
  return parsed;
}

// ---------------------------------------------------------------------------
// Corpus assembly

const Speech* Corpus::find(std::string_view speech_id) const {
  for (const auto& speech : speeches) {
    if (speech.id == speech_id) return &speech;
  }
  return nullptr;
}

std::vector<const Speech*> Corpus::included() const {
  std::vector<const Speech*> out;
  for (const auto& speech : speeches) {
    if (speech.included()) out.push_back(&speech);
  }
  return out;
}

std::vector<fs::path> list_protocol_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

CorpusStats compute_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.protocol_count = corpus.protocols.size();
  stats.speech_count = corpus.speeches.size();
  for (const auto& speech : corpus.speeches) {
    if (speech.excluded) {
      ++stats.exclusions[std::string(to_string(*speech.excluded))];
      continue;
    }
    ++stats.included_count;
    ++stats.speeches_per_year[speech.year];
    ++stats.speeches_per_affiliation_year[speech.affiliation][speech.year];
  }
  stats.affiliation_count = corpus.affiliations.size();
  return stats;
}

Corpus corpus_from_speeches(std::vector<Speech> speeches) {
  Corpus corpus;
  std::set<std::string> seen;
  for (const auto& speech : speeches) {
    if (seen.insert(speech.protocol_id).second) {
      Protocol protocol;
      protocol.id = speech.protocol_id;
      protocol.date = speech.date;
      corpus.protocols.push_back(std::move(protocol));
    }
    if (speech.included()) corpus.affiliations.insert(speech.affiliation);
  }
  corpus.speeches = std::move(speeches);
  return corpus;
}

BuildResult build_corpus(const std::vector<fs::path>& protocol_files,
                         const AffiliationOverrides& overrides, const CorpusConfig& config) {
  std::vector<ParsedProtocol> parsed;
  std::vector<FileFailure> failures;
  std::set<std::string> ids;
  for (const auto& file : protocol_files) {
    try {
      auto result = parse_protocol(io::read_file(file), overrides, config);
      if (!ids.insert(result.protocol.id).second) {
        throw Error(ErrorCode::MalformedHeader, "duplicate protocol id " + result.protocol.id);
      }
      parsed.push_back(std::move(result));
    } catch (const Error& e) {
      failures.push_back({file.filename().string(), e.what()});
    }
  }
  if (parsed.empty()) {
    std::string detail = protocol_files.empty() ? "no protocol files" : "";
    for (const auto& failure : failures) {
      detail += (detail.empty() ? "" : "; ") + failure.file + ": " + failure.error;
    }
    throw Error(ErrorCode::NoProtocols, detail);
  }
  std::sort(parsed.begin(), parsed.end(), [](const auto& a, const auto& b) {
    if (a.protocol.date != b.protocol.date) return a.protocol.date < b.protocol.date;
    return a.protocol.id < b.protocol.id;
  });

  BuildResult result;
  for (auto& p : parsed) {
    for (auto& speech : p.speeches) {
      if (speech.included()) result.corpus.affiliations.insert(speech.affiliation);
      result.corpus.speeches.push_back(std::move(speech));
    }
    result.corpus.protocols.push_back(std::move(p.protocol));
  }
  result.stats = compute_stats(result.corpus);
  result.stats.failures = std::move(failures);
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_jsonl(const std::vector<Speech>& speeches) {
  std::string out;
  for (const auto& speech : speeches) {
    json record;
    record["id"] = speech.id;
    record["protocol_id"] = speech.protocol_id;
    record["date"] = speech.date.to_string();
    record["year"] = speech.year;
    record["speaker_name"] = speech.speaker_name;
    record["affiliation"] = speech.affiliation;
    record["text"] = speech.text;
    record["excluded"] = speech.excluded.has_value();
    record["exclusion_reason"] =
        speech.excluded ? json(std::string(to_string(*speech.excluded))) : json(nullptr);
    out += record.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::vector<Speech> speeches_from_jsonl(std::string_view text) {
  std::vector<Speech> speeches;
  std::size_t line_no = 0;
  for (const auto& line : io::lines(text)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    try {
      auto record = json::parse(line);
      Speech speech;
      speech.id = record.at("id").get<std::string>();
      speech.protocol_id = record.at("protocol_id").get<std::string>();
      auto date = Date::parse(record.at("date").get<std::string>());
      if (!date) throw Error(ErrorCode::ParseError, "bad date");
      speech.date = *date;
      speech.year = record.at("year").get<int>();
      speech.speaker_name = record.at("speaker_name").get<std::string>();
      speech.affiliation = record.at("affiliation").get<std::string>();
      speech.text = record.at("text").get<std::string>();
      if (record.at("excluded").get<bool>()) {
        auto reason = parse_exclusion_reason(record.at("exclusion_reason").get<std::string>());
        if (!reason) throw Error(ErrorCode::ParseError, "unknown exclusion reason");
        speech.excluded = *reason;
      }
      if (speech.year != speech.date.year) {
        throw Error(ErrorCode::ParseError, "year does not match date");
      }
      speeches.push_back(std::move(speech));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return speeches;
}

std::string stats_to_json(const CorpusStats& stats) {
  json out;
  out["schema_version"] = 1;
  out["protocol_count"] = stats.protocol_count;
  out["speech_count"] = stats.speech_count;
  out["included_count"] = stats.included_count;
  out["affiliation_count"] = stats.affiliation_count;
  json per_year = json::object();
  for (const auto& [year, count] : stats.speeches_per_year) {
    per_year[std::to_string(year)] = count;
  }
  out["speeches_per_year"] = per_year;
  json per_aff = json::object();
  for (const auto& [affiliation, years] : stats.speeches_per_affiliation_year) {
    json row = json::object();
    for (const auto& [year, count] : years) row[std::to_string(year)] = count;
    per_aff[affiliation] = row;
  }
  out["speeches_per_affiliation_year"] = per_aff;
  json exclusions = json::object();
  for (const auto& [reason, count] : stats.exclusions) exclusions[reason] = count;
  out["exclusions"] = exclusions;
  json failures = json::array();
  for (const auto& failure : stats.failures) {
    failures.push_back({{"file", failure.file}, {"error", failure.error}});
  }
  out["failures"] = failures;
  return out.dump(2) + "\n";
}

}  // namespace discursive::corpus
