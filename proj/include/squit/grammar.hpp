#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace squit {

enum class QuestionType { SingleEntity, MultiEntity, Count };

std::string_view to_string(QuestionType type);
std::optional<QuestionType> parse_question_type(std::string_view text);

struct Symbol {
  std::string text;  // terminal text (may hold several tokens) or nonterminal name
  bool terminal = false;

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

using Alternative = std::vector<Symbol>;

// A context-free grammar whose language is a set of baseline templates.
// Alternatives keep source order; enumeration order depends on it.
struct Grammar {
  std::string name;
  std::string start_symbol;
  std::vector<std::string> nonterminals;  // in order of first definition
  std::map<std::string, std::vector<Alternative>> rules;
  QuestionType question_type = QuestionType::SingleEntity;
  std::vector<std::string> warnings;  // e.g. unreachable nonterminals

  std::size_t terminal_count() const;
};

// Grammar source syntax, one rule per line:
//
//   # comment
//   @type Count
//   S -> "How many [NOUN] does" NOUN "have ?" | ...
//        | "continued alternatives"
//
// Repeated left-hand sides append alternatives. The first rule's left-hand
// side is the start symbol. `@type` defaults to SingleEntity.
Grammar parse_grammar(std::string_view text, std::string name = "grammar");
Grammar load_grammar(const std::string& path);

struct BaselineTemplate {
  std::string id;
  std::vector<std::string> tokens;
  int depth = 0;  // minimal derivation-tree height
  QuestionType question_type = QuestionType::SingleEntity;

  std::string text() const;
  friend bool operator==(const BaselineTemplate&, const BaselineTemplate&) = default;
};

inline constexpr std::string_view kWhSlot = "[WH]";
inline constexpr std::string_view kThingSlot = "[THING]";

// "[NOUN]", "[VERB-ADP]", ... : any bracketed slot other than [WH] and [THING].
bool is_predicate_slot(std::string_view token);

// Every distinct terminal string derivable with tree height <= max_depth,
// in leftmost-derivation / alternative order, each tagged with its minimal
// height. Throws ContractError when max_depth < 1 or the result would exceed
// max_templates.
std::vector<BaselineTemplate> enumerate_templates(const Grammar& grammar, int max_depth,
                                                  std::size_t max_templates = 1'000'000);

// Returns a description of the first slot-count violation, if any.
std::optional<std::string> check_template(const BaselineTemplate& t);

struct TemplateStats {
  std::size_t count = 0;
  double mean_depth = 0.0;
  std::map<QuestionType, std::size_t> per_type;
  std::map<int, std::size_t> depth_histogram;
};

TemplateStats template_stats(const std::vector<BaselineTemplate>& templates);
std::string format_template_stats(const TemplateStats& stats);

}  // namespace squit
