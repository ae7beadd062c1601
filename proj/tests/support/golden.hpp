#pragma once

#include <set>
#include <string>
#include <vector>

#include "squit/constructor.hpp"
#include "squit/kb.hpp"

namespace squit::testing {

// A published question/query pair with a mini slice that can only produce it:
// one label per record and one predicate per signature.
struct GoldenRow {
  std::string name;
  QuestionType type;
  std::string baseline;  // space-separated template tokens
  std::vector<std::string> start_types;
  std::vector<PredicateRecord> predicates;
  std::vector<EntityRecord> entities;
  std::set<std::string> stand_in_types;
  std::string question;
  std::string query;
};

const std::vector<GoldenRow>& golden_rows();

// Runs the row through numbering, typing and construction.
QAPair build_golden(const GoldenRow& row, std::uint64_t seed = 1);

}  // namespace squit::testing
