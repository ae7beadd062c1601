#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace squit {

enum class Pos { Noun, VerbAdp, NounAdp, Other };

std::string_view to_string(Pos pos);
std::optional<Pos> parse_pos(std::string_view text);

// A knowledge-base property typed as a function domain_type -> range_type.
// A property shared by several subject types appears as one record per
// signature, so ids repeat across records.
struct PredicateRecord {
  std::string id;
  std::vector<std::string> labels;
  Pos pos = Pos::Noun;
  std::string domain_type;
  std::string range_type;

  friend bool operator==(const PredicateRecord&, const PredicateRecord&) = default;
};

struct EntityRecord {
  std::string id;
  std::vector<std::string> labels;
  std::string entity_type;

  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

struct KnowledgeSlice {
  std::vector<PredicateRecord> predicates;
  std::vector<EntityRecord> entities;
  std::vector<std::string> domains;

  friend bool operator==(const KnowledgeSlice&, const KnowledgeSlice&) = default;
};

// Lowercased label -> POS.
using PosLexicon = std::map<std::string, Pos, std::less<>>;

PosLexicon load_pos_lexicon(const std::string& path);

// Lexicon hit wins; otherwise a suffix heuristic over the final adposition.
Pos tag_pos(std::string_view label, const PosLexicon* lexicon = nullptr);

// Trims and collapses internal whitespace runs to one space.
std::string normalize_label(std::string_view label);

// Drops labels that are empty after normalization, end in " ID", or contain
// square brackets (they would break the "[ label ]" query form). Keeps order
// and removes repeats.
std::vector<std::string> filter_labels(const std::vector<std::string>& labels,
                                       bool drop_id_suffix);

std::vector<PredicateRecord> load_predicates(const std::string& path,
                                             const PosLexicon* lexicon = nullptr);
std::vector<EntityRecord> load_entities(const std::string& path);

// Parsing of a single dump line; exposed for the fetch cache and tests.
// Returns nullopt when the record is filtered out.
std::optional<PredicateRecord> parse_predicate_line(std::string_view line,
                                                    const std::string& source,
                                                    std::size_t line_no,
                                                    const PosLexicon* lexicon);
std::optional<EntityRecord> parse_entity_line(std::string_view line,
                                              const std::string& source,
                                              std::size_t line_no);

void write_predicates(const std::vector<PredicateRecord>& predicates, const std::string& path);
void write_entities(const std::vector<EntityRecord>& entities, const std::string& path);

KnowledgeSlice make_slice(std::vector<PredicateRecord> predicates,
                          std::vector<EntityRecord> entities);

struct LabelSummary {
  std::size_t records = 0;
  std::size_t unique_ids = 0;
  std::size_t labels = 0;
  double mean_labels = 0.0;   // labels per unique id, primary label included
  double mean_aliases = 0.0;  // same, primary label excluded
};

LabelSummary summarize_predicates(const std::vector<PredicateRecord>& predicates);
LabelSummary summarize_entities(const std::vector<EntityRecord>& entities);

// Live ingestion from a SPARQL endpoint (standard JSON results format).
struct FetchOptions {
  std::string cache_path;  // entity dump written on success; empty disables
  int timeout_seconds = 60;
  std::string user_agent = "squit/1.0";
};

// Entities of one ontological type. Predicate function types are curated
// input, so the returned slice carries entities only.
KnowledgeSlice fetch_slice(const std::string& endpoint, const std::string& domain_type,
                           std::size_t entity_limit, const FetchOptions& options = {});

// Builds the entity query sent by fetch_slice.
std::string entity_query(const std::string& domain_type, std::size_t entity_limit);

// Parses a SPARQL JSON results document with ?item / ?label bindings.
std::vector<EntityRecord> parse_entity_results(std::string_view body,
                                               const std::string& domain_type,
                                               std::size_t entity_limit);

}  // namespace squit
