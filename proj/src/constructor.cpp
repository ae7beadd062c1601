#include "squit/constructor.hpp"

#include <sstream>

#include <fmt/format.h>

#include "squit/error.hpp"

namespace squit {

namespace {

using Kind = TemplateToken::Kind;

bool attaches_left(std::string_view token) {
  return token == "?" || token == "," || token == "'s";
}

std::string path_text(const std::vector<std::string>& chain) {
  std::string out;
  for (const auto& id : chain) {
    if (!out.empty()) out += " / ";
    out += "wdt:" + id;
  }
  return out;
}

std::string triple(const std::string& label, const std::vector<std::string>& chain) {
  return fmt::format("[ {} ] {} ?end .", label, path_text(chain));
}

std::string bind(const std::string& label) { return fmt::format("BIND ( [ {} ] as ?end ) .", label); }

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

WhTable default_wh_table() { return {{"person", "Who"}, {"human", "Who"}}; }

std::string select_wh(const std::string& range_type, const WhTable& table) {
  auto it = table.find(range_type);
  return it == table.end() ? "What" : it->second;
}

SliceIndex::SliceIndex(const KnowledgeSlice& slice, std::set<std::string> stand_in_types)
    : slice_(&slice) {
  for (const auto& p : slice.predicates)
    predicates_[{Signature{p.domain_type, p.range_type}, p.pos}].push_back(&p);
  std::vector<const EntityRecord*> stand_ins;
  for (const auto& e : slice.entities) {
    if (stand_in_types.contains(e.entity_type)) stand_ins.push_back(&e);
    else entities_[e.entity_type].push_back(&e);
  }
  if (!stand_ins.empty()) {
    // Every type a slot can ask for: entity types plus predicate domains.
    std::set<std::string> types;
    for (const auto& p : slice.predicates) types.insert(p.domain_type);
    for (const auto& [type, list] : entities_) types.insert(type);
    for (const auto& type : types) {
      auto& list = entities_[type];
      list.insert(list.end(), stand_ins.begin(), stand_ins.end());
    }
  }
}

const std::vector<const PredicateRecord*>& SliceIndex::predicates(const Signature& sig,
                                                                  Pos pos) const {
  static const std::vector<const PredicateRecord*> kNone;
  auto it = predicates_.find({sig, pos});
  return it == predicates_.end() ? kNone : it->second;
}

const std::vector<const EntityRecord*>& SliceIndex::entities(const std::string& type) const {
  static const std::vector<const EntityRecord*> kNone;
  auto it = entities_.find(type);
  return it == entities_.end() ? kNone : it->second;
}

FilledQuestion fill_question(const TypedTemplate& t, const SliceIndex& index, Rng& rng,
                             const WhTable& wh) {
  FilledQuestion out;
  const std::size_t chains = t.numbered.chain_count();
  out.entities.resize(chains, nullptr);
  out.entity_labels.resize(chains);
  out.entity_spans.resize(chains);
  out.predicate_ids.resize(chains);
  for (std::size_t c = 0; c < chains; ++c) out.predicate_ids[c].resize(t.numbered.chain_pos[c].size());

  auto append = [&](std::string_view token) -> Span {
    if (!out.question.empty() && !attaches_left(token)) out.question += ' ';
    Span span{out.question.size(), token.size()};
    out.question += token;
    return span;
  };

  for (const auto& tok : t.tokens) {
    switch (tok.kind) {
      case Kind::Word:
        append(tok.text);
        break;
      case Kind::Wh:
        append(select_wh(t.wh_range_type, wh));
        break;
      case Kind::Thing: {
        const auto c = static_cast<std::size_t>(tok.chain);
        const auto& type = t.entity_slots[c].type;
        const auto& candidates = index.entities(type);
        if (candidates.empty())
          throw UnsatisfiableSlotError("no entity of type '" + type + "' in the slice");
        const auto* e = candidates[rng.uniform(candidates.size())];
        const auto& label = e->labels[rng.uniform(e->labels.size())];
        out.entities[c] = e;
        out.entity_labels[c] = label;
        out.entity_spans[c] = append(label);
        break;
      }
      case Kind::Predicate: {
        const auto& sig = *tok.signature;
        const auto& candidates = index.predicates(sig, tok.pos);
        if (candidates.empty()) {
          throw UnsatisfiableSlotError(fmt::format("no {} predicate with signature {}->{}",
                                                   to_string(tok.pos), sig.from, sig.to));
        }
        const auto* p = candidates[rng.uniform(candidates.size())];
        const auto& label = p->labels[rng.uniform(p->labels.size())];
        out.predicate_ids[static_cast<std::size_t>(tok.chain)][static_cast<std::size_t>(tok.index)] =
            p->id;
        out.predicate_mentions.push_back({append(label), p->id});
        break;
      }
    }
  }
  return out;
}

std::string build_query(QuestionType type, const std::vector<std::string>& entity_labels,
                        const std::vector<std::vector<std::string>>& chains) {
  switch (type) {
    case QuestionType::SingleEntity:
      if (entity_labels.size() != 1 || chains.size() != 1)
        throw ContractError("single-entity query needs one entity and one chain");
      if (chains[0].empty()) return fmt::format("SELECT ?end WHERE {{ {} }}", bind(entity_labels[0]));
      return fmt::format("SELECT ?end WHERE {{ {} }}", triple(entity_labels[0], chains[0]));
    case QuestionType::Count:
      if (entity_labels.size() != 1 || chains.size() != 1 || chains[0].empty())
        throw ContractError("count query needs one entity and one non-empty chain");
      return fmt::format("SELECT ( COUNT ( DISTINCT ?end ) as ?endcount ) WHERE {{ {} }}",
                         triple(entity_labels[0], chains[0]));
    case QuestionType::MultiEntity:
      if (entity_labels.size() != 2 || chains.size() != 2)
        throw ContractError("multi-entity query needs two entities and two chains");
      if (chains[0].empty() && chains[1].empty())
        throw ContractError("multi-entity query needs at least one non-empty chain");
      if (chains[0].empty())
        return fmt::format("ASK {{ {} {} }}", bind(entity_labels[0]), triple(entity_labels[1], chains[1]));
      if (chains[1].empty())
        return fmt::format("ASK {{ {} {} }}", bind(entity_labels[1]), triple(entity_labels[0], chains[0]));
      return fmt::format("ASK {{ {} {} }}", triple(entity_labels[0], chains[0]),
                         triple(entity_labels[1], chains[1]));
  }
  throw ContractError("unknown question type");
}

QAPair generate_pair(const TypedTemplate& t, const SliceIndex& index, Rng& rng, const WhTable& wh) {
  auto filled = fill_question(t, index, rng, wh);
  QAPair pair;
  pair.query = build_query(t.question_type(), filled.entity_labels, filled.predicate_ids);
  pair.question = std::move(filled.question);
  pair.question_type = t.question_type();
  for (const auto* e : filled.entities) pair.entity_ids.push_back(e->id);
  pair.predicate_ids = std::move(filled.predicate_ids);
  pair.template_id = t.id();
  pair.depth = t.depth();
  pair.entity_labels = std::move(filled.entity_labels);
  for (const auto& chain : t.chains) pair.start_types.push_back(chain.start_type);
  pair.entity_spans = std::move(filled.entity_spans);
  pair.predicate_mentions = std::move(filled.predicate_mentions);
  return pair;
}

std::vector<std::string> query_entity_labels(const std::string& query) {
  std::vector<std::string> labels;
  const auto toks = split_ws(query);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i] != "[") continue;
    std::string label;
    std::size_t j = i + 1;
    for (; j < toks.size() && toks[j] != "]"; ++j) {
      if (!label.empty()) label += ' ';
      label += toks[j];
    }
    labels.push_back(std::move(label));
    i = j;
  }
  return labels;
}

std::vector<std::vector<std::string>> query_predicate_chains(const std::string& query) {
  std::vector<std::vector<std::string>> chains;
  const auto toks = split_ws(query);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i] != "[") continue;
    while (i < toks.size() && toks[i] != "]") ++i;
    std::vector<std::string> chain;
    for (++i; i < toks.size(); ++i) {
      if (toks[i].rfind("wdt:", 0) == 0) chain.push_back(toks[i].substr(4));
      else if (toks[i] != "/") break;
    }
    --i;
    chains.push_back(std::move(chain));
  }
  return chains;
}

}  // namespace squit
