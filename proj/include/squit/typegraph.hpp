#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "squit/error.hpp"
#include "squit/kb.hpp"
#include "squit/rng.hpp"

namespace squit {

struct Signature {
  std::string from;
  std::string to;

  friend auto operator<=>(const Signature&, const Signature&) = default;
  friend bool operator==(const Signature&, const Signature&) = default;
};

struct EdgePredicate {
  std::string id;
  Pos pos = Pos::Noun;
};

struct TypeEdge {
  Signature signature;
  std::vector<EdgePredicate> predicates;  // in slice order

  bool allows(std::optional<Pos> pos) const;
};

// Directed graph over ontological types; one edge per distinct
// (domain_type, range_type) signature.
class TypeGraph {
 public:
  const std::set<std::string>& nodes() const { return nodes_; }
  const std::vector<TypeEdge>& edges() const { return edges_; }
  bool has_node(const std::string& type) const { return nodes_.contains(type); }

  // Indices into edges(), ordered by target type.
  const std::vector<std::size_t>& outgoing(const std::string& type) const;

  // Every signature a predicate id carries.
  std::vector<Signature> signatures_of(const std::string& predicate_id) const;

  std::string to_dot() const;

 private:
  friend TypeGraph build_graph(const std::vector<PredicateRecord>& predicates);

  std::set<std::string> nodes_;
  std::vector<TypeEdge> edges_;
  std::map<std::string, std::vector<std::size_t>> outgoing_;
  std::map<std::string, std::vector<Signature>> by_predicate_;
};

// Throws ValidationError("empty graph") for an empty list.
TypeGraph build_graph(const std::vector<PredicateRecord>& predicates);

struct PathStep {
  Signature signature;
  std::optional<Pos> pos;  // constraint used when sampling
};

struct PredicatePath {
  std::string start_type;
  std::vector<PathStep> steps;

  const std::string& end_type() const {
    return steps.empty() ? start_type : steps.back().signature.to;
  }
  std::size_t size() const { return steps.size(); }
};

enum class StepPolicy { EdgeUniform, PredicateUniform };

class DeadEndError : public Error {
 public:
  DeadEndError(const std::string& what, PredicatePath partial)
      : Error(what), partial_(std::move(partial)) {}
  const PredicatePath& partial() const { return partial_; }

 private:
  PredicatePath partial_;
};

// Random walk of exactly pos_constraints.size() steps from start_type. An
// empty optional leaves that step unconstrained.
PredicatePath sample_unidirectional_path(const TypeGraph& graph, const std::string& start_type,
                                         const std::vector<std::optional<Pos>>& pos_constraints,
                                         Rng& rng, StepPolicy policy = StepPolicy::EdgeUniform);

PredicatePath sample_unidirectional_path(const TypeGraph& graph, const std::string& start_type,
                                         std::size_t length, Rng& rng,
                                         StepPolicy policy = StepPolicy::EdgeUniform);

struct BidirectionalOptions {
  int attempts_per_first_path = 64;
  int first_path_resamples = 32;
  StepPolicy policy = StepPolicy::EdgeUniform;
};

// Two walks that end on the same type. A zero-length side meets at its own
// start type.
std::pair<PredicatePath, PredicatePath> sample_bidirectional_pair(
    const TypeGraph& graph, const std::string& start_a,
    const std::vector<std::optional<Pos>>& constraints_a, const std::string& start_b,
    const std::vector<std::optional<Pos>>& constraints_b, Rng& rng,
    const BidirectionalOptions& options = {});

std::pair<PredicatePath, PredicatePath> sample_bidirectional_pair(
    const TypeGraph& graph, std::size_t length_a, std::size_t length_b,
    const std::string& start_a, const std::string& start_b, Rng& rng,
    const BidirectionalOptions& options = {});

// True iff some choice of signatures for the ids composes from start_type.
// Unknown ids yield false; the reason goes to *diagnostic when given.
bool validate_chain(const TypeGraph& graph, const std::string& start_type,
                    const std::vector<std::string>& predicate_ids,
                    std::string* diagnostic = nullptr);

}  // namespace squit
