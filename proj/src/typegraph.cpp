#include "squit/typegraph.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace squit {

namespace {

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

std::size_t allowed_count(const TypeEdge& edge, std::optional<Pos> pos) {
  if (!pos) return edge.predicates.size();
  return static_cast<std::size_t>(std::count_if(
      edge.predicates.begin(), edge.predicates.end(),
      [&](const EdgePredicate& p) { return p.pos == *pos; }));
}

}  // namespace

bool TypeEdge::allows(std::optional<Pos> pos) const { return allowed_count(*this, pos) > 0; }

const std::vector<std::size_t>& TypeGraph::outgoing(const std::string& type) const {
  static const std::vector<std::size_t> kNone;
  auto it = outgoing_.find(type);
  return it == outgoing_.end() ? kNone : it->second;
}

std::vector<Signature> TypeGraph::signatures_of(const std::string& predicate_id) const {
  auto it = by_predicate_.find(predicate_id);
  return it == by_predicate_.end() ? std::vector<Signature>{} : it->second;
}

std::string TypeGraph::to_dot() const {
  std::string out = "digraph types {\n";
  for (const auto& node : nodes_) out += fmt::format("  {};\n", dot_quote(node));
  for (const auto& edge : edges_) {
    std::string label;
    for (const auto& p : edge.predicates) {
      if (!label.empty()) label += ", ";
      label += p.id;
    }
    out += fmt::format("  {} -> {} [label={}];\n", dot_quote(edge.signature.from),
                       dot_quote(edge.signature.to), dot_quote(label));
  }
  return out + "}\n";
}

TypeGraph build_graph(const std::vector<PredicateRecord>& predicates) {
  if (predicates.empty()) throw ValidationError("empty graph");
  TypeGraph g;
  std::map<Signature, TypeEdge> edges;
  for (const auto& p : predicates) {
    g.nodes_.insert(p.domain_type);
    g.nodes_.insert(p.range_type);
    Signature sig{p.domain_type, p.range_type};
    auto& edge = edges[sig];
    edge.signature = sig;
    bool seen = std::any_of(edge.predicates.begin(), edge.predicates.end(),
                            [&](const EdgePredicate& e) { return e.id == p.id; });
    if (!seen) edge.predicates.push_back({p.id, p.pos});
    auto& sigs = g.by_predicate_[p.id];
    if (std::find(sigs.begin(), sigs.end(), sig) == sigs.end()) sigs.push_back(sig);
  }
  for (auto& [sig, edge] : edges) {
    g.outgoing_[sig.from].push_back(g.edges_.size());
    g.edges_.push_back(std::move(edge));
  }
  return g;
}

namespace {

// Extends `path` one step per constraint; false at a dead end, leaving the
// partial path in place.
bool walk(const TypeGraph& graph, const std::vector<std::optional<Pos>>& pos_constraints, Rng& rng,
          StepPolicy policy, PredicatePath& path) {
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> weights;
  for (const auto& constraint : pos_constraints) {
    candidates.clear();
    weights.clear();
    std::size_t total = 0;
    for (auto idx : graph.outgoing(path.end_type())) {
      std::size_t w = allowed_count(graph.edges()[idx], constraint);
      if (w == 0) continue;
      candidates.push_back(idx);
      weights.push_back(w);
      total += w;
    }
    if (candidates.empty()) return false;
    std::size_t pick = 0;
    if (policy == StepPolicy::EdgeUniform) {
      pick = rng.uniform(candidates.size());
    } else {
      auto r = rng.uniform(total);
      while (r >= weights[pick]) r -= weights[pick++];
    }
    path.steps.push_back({graph.edges()[candidates[pick]].signature, constraint});
  }
  return true;
}

}  // namespace

PredicatePath sample_unidirectional_path(const TypeGraph& graph, const std::string& start_type,
                                         const std::vector<std::optional<Pos>>& pos_constraints,
                                         Rng& rng, StepPolicy policy) {
  if (!graph.has_node(start_type))
    throw ContractError("start type '" + start_type + "' is not in the type graph");
  PredicatePath path{start_type, {}};
  if (!walk(graph, pos_constraints, rng, policy, path)) {
    throw DeadEndError(fmt::format("dead end at type '{}' after {} steps", path.end_type(),
                                   path.steps.size()),
                       path);
  }
  return path;
}

PredicatePath sample_unidirectional_path(const TypeGraph& graph, const std::string& start_type,
                                         std::size_t length, Rng& rng, StepPolicy policy) {
  return sample_unidirectional_path(graph, start_type,
                                    std::vector<std::optional<Pos>>(length), rng, policy);
}

std::pair<PredicatePath, PredicatePath> sample_bidirectional_pair(
    const TypeGraph& graph, const std::string& start_a,
    const std::vector<std::optional<Pos>>& constraints_a, const std::string& start_b,
    const std::vector<std::optional<Pos>>& constraints_b, Rng& rng,
    const BidirectionalOptions& options) {
  for (const auto& start : {start_a, start_b}) {
    if (!graph.has_node(start))
      throw ContractError("start type '" + start + "' is not in the type graph");
  }
  PredicatePath last_a{start_a, {}};
  PredicatePath b;
  for (int r = 0; r < options.first_path_resamples; ++r) {
    PredicatePath a{start_a, {}};
    const bool a_ok = walk(graph, constraints_a, rng, options.policy, a);
    last_a = a;
    if (!a_ok) continue;
    for (int k = 0; k < options.attempts_per_first_path; ++k) {
      b.start_type = start_b;
      b.steps.clear();
      if (walk(graph, constraints_b, rng, options.policy, b) && b.end_type() == a.end_type())
        return {std::move(a), std::move(b)};
      // A zero-length B always ends at start_b; retrying cannot help.
      if (constraints_b.empty()) break;
    }
  }
  throw DeadEndError(fmt::format("no meeting type for '{}' ({} steps) and '{}' ({} steps)",
                                 start_a, constraints_a.size(), start_b, constraints_b.size()),
                     last_a);
}

std::pair<PredicatePath, PredicatePath> sample_bidirectional_pair(
    const TypeGraph& graph, std::size_t length_a, std::size_t length_b,
    const std::string& start_a, const std::string& start_b, Rng& rng,
    const BidirectionalOptions& options) {
  return sample_bidirectional_pair(graph, start_a, std::vector<std::optional<Pos>>(length_a),
                                   start_b, std::vector<std::optional<Pos>>(length_b), rng,
                                   options);
}

bool validate_chain(const TypeGraph& graph, const std::string& start_type,
                    const std::vector<std::string>& predicate_ids, std::string* diagnostic) {
  std::set<std::string> frontier{start_type};
  for (std::size_t i = 0; i < predicate_ids.size(); ++i) {
    const auto sigs = graph.signatures_of(predicate_ids[i]);
    if (sigs.empty()) {
      if (diagnostic) *diagnostic = "unknown predicate " + predicate_ids[i];
      return false;
    }
    std::set<std::string> next;
    for (const auto& sig : sigs)
      if (frontier.contains(sig.from)) next.insert(sig.to);
    if (next.empty()) {
      if (diagnostic)
        *diagnostic = fmt::format("predicate {} at position {} takes none of the types reached",
                                  predicate_ids[i], i);
      return false;
    }
    frontier = std::move(next);
  }
  return true;
}

}  // namespace squit
