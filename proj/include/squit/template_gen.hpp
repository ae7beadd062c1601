#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "squit/error.hpp"
#include "squit/grammar.hpp"
#include "squit/kb.hpp"
#include "squit/rng.hpp"
#include "squit/typegraph.hpp"

namespace squit {

struct TemplateToken {
  enum class Kind { Word, Wh, Thing, Predicate };

  Kind kind = Kind::Word;
  std::string text;  // literal word, or the original slot marker
  int chain = -1;    // Thing: entity index; Predicate: owning chain
  int index = -1;    // Predicate: application order within the chain
  Pos pos = Pos::Noun;
  std::optional<Signature> signature;  // set by assign_types

  friend bool operator==(const TemplateToken& a, const TemplateToken& b) {
    return a.kind == b.kind && a.text == b.text && a.chain == b.chain && a.index == b.index &&
           a.pos == b.pos && a.signature == b.signature;
  }
};

class StructuralError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Baseline template whose predicate slots carry their nesting order. Chain k
// belongs to the k-th [THING] in surface order.
struct NumberedTemplate {
  BaselineTemplate base;
  std::vector<TemplateToken> tokens;
  std::vector<std::vector<Pos>> chain_pos;  // [chain][index] -> slot POS

  std::size_t chain_count() const { return chain_pos.size(); }
  // "[WH] was the [NOUN-1] of [THING] 's [NOUN-0] ?"; multi-entity chains
  // are prefixed a, b: "[NOUN-b0]".
  std::string text() const;
};

// Numbers predicate slots outward from each [THING]:
//   [THING] 's [P]           possessive, applied first, left to right
//   the [P] of [THING]       applied next, innermost (rightmost) first
//   [THING] [P]              suffix slot (VERB-ADP form), applied to the
//                            whole noun phrase before it
//   many [P] does [THING]    count frame, applied last
// Any slot not reached by these rules is a StructuralError.
NumberedTemplate number_predicates(const BaselineTemplate& t);

struct TypedTemplate {
  struct EntitySlot {
    std::size_t position = 0;  // token index of the [THING]
    std::string type;          // ontological type the chain starts from
  };

  NumberedTemplate numbered;
  std::vector<TemplateToken> tokens;  // predicate tokens carry signatures
  std::vector<EntitySlot> entity_slots;
  std::vector<PredicatePath> chains;
  std::string wh_range_type;

  const std::string& id() const { return numbered.base.id; }
  QuestionType question_type() const { return numbered.base.question_type; }
  int depth() const { return numbered.base.depth; }
  // "[WH] is the [NOUN-1:person->person] of the [NOUN-0:film->person] of [THING:film] ?"
  std::string text() const;
};

struct TypingOptions {
  int retries = 32;
  StepPolicy policy = StepPolicy::EdgeUniform;
  BidirectionalOptions bidirectional{64, 4, StepPolicy::EdgeUniform};
};

// Picks a start type per chain uniformly from entity_type_pool and types
// every slot along a sampled path. Throws DeadEndError once the retry budget
// is spent; callers treat that as "skip this template".
TypedTemplate assign_types(const NumberedTemplate& numbered, const TypeGraph& graph,
                           const std::vector<std::string>& entity_type_pool, Rng& rng,
                           const TypingOptions& options = {});

// Same, with the start type of each chain fixed by the caller.
TypedTemplate assign_types_from(const NumberedTemplate& numbered, const TypeGraph& graph,
                                const std::vector<std::string>& start_types, Rng& rng,
                                const TypingOptions& options = {});

nlohmann::ordered_json to_json(const TypedTemplate& t);

}  // namespace squit
