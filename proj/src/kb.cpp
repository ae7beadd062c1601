#include "squit/kb.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "squit/error.hpp"

namespace squit {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kAdpositions[] = {"in", "of", "by", "at", "on", "for", "with", "from"};

// Verbs seen in property labels that carry no -ing/-ed ending.
constexpr std::string_view kVerbs[] = {"born", "set",   "lives", "live", "works", "work",
                                       "plays", "play", "stars", "star", "takes", "based",
                                       "died",  "made", "sung",  "won",  "written", "shot"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) words.push_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

std::vector<std::string> read_labels(const json& record, const std::string& source,
                                     std::size_t line_no) {
  auto it = record.find("labels");
  if (it == record.end()) return {};
  if (!it->is_array()) throw ParseError(source, line_no, "field 'labels' must be a list");
  std::vector<std::string> labels;
  for (const auto& label : *it) {
    if (!label.is_string()) throw ParseError(source, line_no, "labels must be strings");
    labels.push_back(label.get<std::string>());
  }
  return labels;
}

std::string read_string(const json& record, const char* field, const std::string& source,
                        std::size_t line_no) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string())
    throw ParseError(source, line_no, std::string("field '") + field + "' must be a string");
  return normalize_label(it->get<std::string>());
}

json parse_record(std::string_view line, const std::string& source, std::size_t line_no) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object())
    throw ParseError(source, line_no, "malformed record");
  if (!record.contains("id") || !record["id"].is_string() ||
      record["id"].get<std::string>().empty())
    throw ParseError(source, line_no, "record has no id");
  return record;
}

bool skippable(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    fn(line, line_no);
  }
  if (in.bad()) throw IoError(path, "read failed");
}

// Writes through a temporary so a failed write never leaves a partial file.
template <typename Fn>
void write_atomically(const std::string& path, Fn&& fn) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    fn(out);
    out.flush();
    if (!out) throw IoError(path, "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path, ec.message());
}

LabelSummary summarize(const std::map<std::string, std::set<std::string>>& labels_by_id,
                       std::size_t records) {
  LabelSummary s;
  s.records = records;
  s.unique_ids = labels_by_id.size();
  for (const auto& [id, labels] : labels_by_id) s.labels += labels.size();
  if (s.unique_ids > 0) {
    s.mean_labels = static_cast<double>(s.labels) / static_cast<double>(s.unique_ids);
    s.mean_aliases =
        static_cast<double>(s.labels - s.unique_ids) / static_cast<double>(s.unique_ids);
  }
  return s;
}

}  // namespace

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::VerbAdp: return "VERB-ADP";
    case Pos::NounAdp: return "NOUN-ADP";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

std::optional<Pos> parse_pos(std::string_view text) {
  if (text == "NOUN") return Pos::Noun;
  if (text == "VERB-ADP") return Pos::VerbAdp;
  if (text == "NOUN-ADP") return Pos::NounAdp;
  if (text == "OTHER") return Pos::Other;
  return std::nullopt;
}

PosLexicon load_pos_lexicon(const std::string& path) {
  PosLexicon lexicon;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(path, line_no, "expected label<TAB>POS");
    auto pos = parse_pos(normalize_label(line.substr(tab + 1)));
    if (!pos) throw ParseError(path, line_no, "unknown POS category");
    lexicon[lowercase(normalize_label(line.substr(0, tab)))] = *pos;
  });
  return lexicon;
}

Pos tag_pos(std::string_view label, const PosLexicon* lexicon) {
  if (lexicon) {
    auto it = lexicon->find(lowercase(normalize_label(label)));
    if (it != lexicon->end()) return it->second;
  }
  const std::string lower = lowercase(label);
  const auto words = split_words(lower);
  if (words.empty()) return Pos::Noun;
  const auto last = words.back();
  if (std::find(std::begin(kAdpositions), std::end(kAdpositions), last) ==
      std::end(kAdpositions))
    return Pos::Noun;
  if (words.size() >= 2) {
    const auto prev = words[words.size() - 2];
    if (ends_with(prev, "ing") || ends_with(prev, "ed") ||
        std::find(std::begin(kVerbs), std::end(kVerbs), prev) != std::end(kVerbs))
      return Pos::VerbAdp;
  }
  return Pos::NounAdp;
}

std::string normalize_label(std::string_view label) {
  std::string out;
  for (auto word : split_words(label)) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::vector<std::string> filter_labels(const std::vector<std::string>& labels,
                                       bool drop_id_suffix) {
  std::vector<std::string> kept;
  for (const auto& raw : labels) {
    std::string label = normalize_label(raw);
    if (label.empty()) continue;
    if (drop_id_suffix && ends_with(label, " ID")) continue;
    if (label.find_first_of("[]") != std::string::npos) continue;
    if (std::find(kept.begin(), kept.end(), label) != kept.end()) continue;
    kept.push_back(std::move(label));
  }
  return kept;
}

std::optional<PredicateRecord> parse_predicate_line(std::string_view line,
                                                    const std::string& source,
                                                    std::size_t line_no,
                                                    const PosLexicon* lexicon) {
  const json record = parse_record(line, source, line_no);
  const auto raw_labels = read_labels(record, source, line_no);
  if (raw_labels.empty() || normalize_label(raw_labels.front()).empty()) return std::nullopt;

  PredicateRecord p;
  p.id = record["id"].get<std::string>();
  p.labels = filter_labels(raw_labels, /*drop_id_suffix=*/true);
  if (p.labels.empty()) return std::nullopt;

  p.domain_type = read_string(record, "domain_type", source, line_no);
  p.range_type = read_string(record, "range_type", source, line_no);
  if (p.domain_type.empty() || p.range_type.empty())
    throw SchemaError(source + ":" + std::to_string(line_no) + ": predicate " + p.id +
                      " is missing domain_type or range_type");

  const std::string explicit_pos = read_string(record, "pos", source, line_no);
  if (!explicit_pos.empty()) {
    auto pos = parse_pos(explicit_pos);
    if (!pos) throw ParseError(source, line_no, "unknown POS category '" + explicit_pos + "'");
    p.pos = *pos;
  } else {
    p.pos = tag_pos(p.labels.front(), lexicon);
  }
  return p;
}

std::optional<EntityRecord> parse_entity_line(std::string_view line, const std::string& source,
                                              std::size_t line_no) {
  const json record = parse_record(line, source, line_no);
  EntityRecord e;
  e.id = record["id"].get<std::string>();
  e.labels = filter_labels(read_labels(record, source, line_no), /*drop_id_suffix=*/false);
  if (e.labels.empty()) return std::nullopt;
  e.entity_type = read_string(record, "entity_type", source, line_no);
  if (e.entity_type.empty())
    throw SchemaError(source + ":" + std::to_string(line_no) + ": entity " + e.id +
                      " is missing entity_type");
  return e;
}

std::vector<PredicateRecord> load_predicates(const std::string& path, const PosLexicon* lexicon) {
  std::vector<PredicateRecord> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    auto p = parse_predicate_line(line, path, line_no, lexicon);
    if (!p) return;
    if (!seen.emplace(p->id, p->domain_type, p->range_type).second) return;
    out.push_back(std::move(*p));
  });
  return out;
}

std::vector<EntityRecord> load_entities(const std::string& path) {
  std::vector<EntityRecord> out;
  std::set<std::string> seen;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    auto e = parse_entity_line(line, path, line_no);
    if (!e) return;
    if (!seen.insert(e->id).second) return;
    out.push_back(std::move(*e));
  });
  return out;
}

void write_predicates(const std::vector<PredicateRecord>& predicates, const std::string& path) {
  write_atomically(path, [&](std::ostream& out) {
    for (const auto& p : predicates) {
      json record;
      record["id"] = p.id;
      record["labels"] = p.labels;
      record["pos"] = to_string(p.pos);
      record["domain_type"] = p.domain_type;
      record["range_type"] = p.range_type;
      out << record.dump() << '\n';
    }
  });
}

void write_entities(const std::vector<EntityRecord>& entities, const std::string& path) {
  write_atomically(path, [&](std::ostream& out) {
    for (const auto& e : entities) {
      json record;
      record["id"] = e.id;
      record["labels"] = e.labels;
      record["entity_type"] = e.entity_type;
      out << record.dump() << '\n';
    }
  });
}

KnowledgeSlice make_slice(std::vector<PredicateRecord> predicates,
                          std::vector<EntityRecord> entities) {
  KnowledgeSlice slice;
  std::set<std::string> domains;
  for (const auto& p : predicates) domains.insert(p.domain_type);
  for (const auto& e : entities) domains.insert(e.entity_type);
  slice.predicates = std::move(predicates);
  slice.entities = std::move(entities);
  slice.domains.assign(domains.begin(), domains.end());
  return slice;
}

LabelSummary summarize_predicates(const std::vector<PredicateRecord>& predicates) {
  std::map<std::string, std::set<std::string>> by_id;
  for (const auto& p : predicates) by_id[p.id].insert(p.labels.begin(), p.labels.end());
  return summarize(by_id, predicates.size());
}

LabelSummary summarize_entities(const std::vector<EntityRecord>& entities) {
  std::map<std::string, std::set<std::string>> by_id;
  for (const auto& e : entities) by_id[e.id].insert(e.labels.begin(), e.labels.end());
  return summarize(by_id, entities.size());
}

}  // namespace squit
