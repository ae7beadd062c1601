#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "squit/grammar.hpp"
#include "squit/kb.hpp"
#include "squit/rng.hpp"
#include "squit/template_gen.hpp"

namespace squit {

// Byte range [begin, begin + length) in a question.
struct Span {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::size_t end() const { return begin + length; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct PredicateMention {
  Span span;
  std::string predicate_id;
  friend bool operator==(const PredicateMention&, const PredicateMention&) = default;
};

struct QAPair {
  std::string question;
  std::string query;
  QuestionType question_type = QuestionType::SingleEntity;
  std::vector<std::string> entity_ids;                 // entity slot order
  std::vector<std::vector<std::string>> predicate_ids;  // per chain, application order
  std::string template_id;
  int depth = 0;
  std::string split_tag;

  // In-memory metadata, not serialized.
  std::vector<std::string> entity_labels;
  std::vector<std::string> start_types;  // per chain
  std::vector<Span> entity_spans;
  std::vector<PredicateMention> predicate_mentions;  // surface order
};

using WhTable = std::map<std::string, std::string, std::less<>>;

WhTable default_wh_table();
std::string select_wh(const std::string& range_type, const WhTable& table = default_wh_table());

// Candidate lookup over a slice. Entities whose type is a stand-in type may
// fill a slot of any type.
class SliceIndex {
 public:
  explicit SliceIndex(const KnowledgeSlice& slice, std::set<std::string> stand_in_types = {});

  const std::vector<const PredicateRecord*>& predicates(const Signature& sig, Pos pos) const;
  const std::vector<const EntityRecord*>& entities(const std::string& type) const;
  const KnowledgeSlice& slice() const { return *slice_; }

 private:
  const KnowledgeSlice* slice_;
  std::map<std::pair<Signature, Pos>, std::vector<const PredicateRecord*>> predicates_;
  std::map<std::string, std::vector<const EntityRecord*>, std::less<>> entities_;
};

class UnsatisfiableSlotError : public Error {
 public:
  using Error::Error;
};

struct FilledQuestion {
  std::string question;
  std::vector<const EntityRecord*> entities;
  std::vector<std::string> entity_labels;
  std::vector<std::vector<std::string>> predicate_ids;
  std::vector<Span> entity_spans;
  std::vector<PredicateMention> predicate_mentions;
};

FilledQuestion fill_question(const TypedTemplate& t, const SliceIndex& index, Rng& rng,
                             const WhTable& wh = default_wh_table());

// Emits one of the five query shapes. Throws ContractError when the inputs
// match none of them.
std::string build_query(QuestionType type, const std::vector<std::string>& entity_labels,
                        const std::vector<std::vector<std::string>>& chains);

QAPair generate_pair(const TypedTemplate& t, const SliceIndex& index, Rng& rng,
                     const WhTable& wh = default_wh_table());

// Entity labels in query order, read back from "[ label ]" groups.
std::vector<std::string> query_entity_labels(const std::string& query);
// wdt:P ids per triple/BIND clause, in query order.
std::vector<std::vector<std::string>> query_predicate_chains(const std::string& query);

}  // namespace squit
