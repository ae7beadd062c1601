#include "squit/template_gen.hpp"

#include <functional>

#include <fmt/format.h>

namespace squit {

namespace {

using Kind = TemplateToken::Kind;

std::string slot_marker(const TemplateToken& tok, bool multi_chain) {
  std::string inner(tok.text.substr(1, tok.text.size() - 2));
  std::string chain = multi_chain ? std::string(1, static_cast<char>('a' + tok.chain)) : "";
  std::string out = fmt::format("[{}-{}{}", inner, chain, tok.index);
  if (tok.signature) out += fmt::format(":{}->{}", tok.signature->from, tok.signature->to);
  return out + "]";
}

std::string render(const std::vector<TemplateToken>& tokens, bool multi_chain,
                   const std::vector<TypedTemplate::EntitySlot>* slots) {
  std::string out;
  for (const auto& tok : tokens) {
    if (!out.empty()) out += ' ';
    if (tok.kind == Kind::Predicate) {
      out += slot_marker(tok, multi_chain);
    } else if (tok.kind == Kind::Thing && slots) {
      out += fmt::format("[THING:{}]", (*slots)[static_cast<std::size_t>(tok.chain)].type);
    } else {
      out += tok.text;
    }
  }
  return out;
}

}  // namespace

std::string NumberedTemplate::text() const { return render(tokens, chain_count() > 1, nullptr); }

std::string TypedTemplate::text() const {
  return render(tokens, numbered.chain_count() > 1, &entity_slots);
}

NumberedTemplate number_predicates(const BaselineTemplate& t) {
  const auto& toks = t.tokens;
  const std::size_t n = toks.size();
  auto word = [&](std::ptrdiff_t i, std::string_view w) {
    return i >= 0 && static_cast<std::size_t>(i) < n && toks[static_cast<std::size_t>(i)] == w;
  };
  auto slot = [&](std::ptrdiff_t i) {
    return i >= 0 && static_cast<std::size_t>(i) < n &&
           is_predicate_slot(toks[static_cast<std::size_t>(i)]);
  };

  NumberedTemplate out;
  out.base = t;
  out.tokens.reserve(n);
  for (const auto& tok : toks) {
    TemplateToken tt;
    tt.text = tok;
    if (tok == kWhSlot) tt.kind = Kind::Wh;
    else if (tok == kThingSlot) tt.kind = Kind::Thing;
    else if (is_predicate_slot(tok)) {
      tt.kind = Kind::Predicate;
      auto pos = parse_pos(std::string_view(tok).substr(1, tok.size() - 2));
      if (!pos) throw StructuralError(fmt::format("template {}: unknown slot {}", t.id, tok));
      tt.pos = *pos;
    }
    out.tokens.push_back(std::move(tt));
  }

  auto fail = [&](const std::string& why) {
    throw StructuralError(fmt::format("template {} '{}': {}", t.id, t.text(), why));
  };

  int chain = 0;
  for (std::size_t thing = 0; thing < n; ++thing) {
    if (out.tokens[thing].kind != Kind::Thing) continue;
    out.tokens[thing].chain = chain;
    std::vector<std::size_t> order;

    // Possessives to the right bind tightest.
    auto right = static_cast<std::ptrdiff_t>(thing) + 1;
    while (word(right, "'s") && slot(right + 1)) {
      order.push_back(static_cast<std::size_t>(right + 1));
      right += 2;
    }
    // "the [P] of" wrappers to the left, innermost first.
    auto left = static_cast<std::ptrdiff_t>(thing) - 1;
    while (word(left, "of") && slot(left - 1)) {
      order.push_back(static_cast<std::size_t>(left - 1));
      left -= 2;
      if (word(left, "the")) --left;
    }
    // Suffix slot applied to the whole phrase ("[THING] [VERB-ADP]").
    if (slot(right)) order.push_back(static_cast<std::size_t>(right));
    // Count frame ("How many [P] does <phrase> have").
    if (word(left, "does") && slot(left - 1) && word(left - 2, "many"))
      order.push_back(static_cast<std::size_t>(left - 1));

    std::vector<Pos> pos;
    for (std::size_t k = 0; k < order.size(); ++k) {
      auto& tok = out.tokens[order[k]];
      if (tok.chain != -1) fail(fmt::format("slot at position {} belongs to two phrases", order[k]));
      tok.chain = chain;
      tok.index = static_cast<int>(k);
      pos.push_back(tok.pos);
    }
    out.chain_pos.push_back(std::move(pos));
    ++chain;
  }
  if (chain == 0) fail("no [THING] slot");
  for (std::size_t i = 0; i < n; ++i) {
    if (out.tokens[i].kind == Kind::Predicate && out.tokens[i].chain == -1)
      fail(fmt::format("slot {} at position {} is not attached by any nesting rule", toks[i], i));
  }
  return out;
}

namespace {

TypedTemplate type_chains(const NumberedTemplate& numbered, const TypeGraph& graph,
                          const std::function<std::string(std::size_t)>& start_of, Rng& rng,
                          const TypingOptions& options) {
  if (graph.nodes().empty()) throw ContractError("type graph is empty");

  auto constraints = [&](std::size_t c) {
    std::vector<std::optional<Pos>> out;
    for (auto p : numbered.chain_pos[c]) out.emplace_back(p);
    return out;
  };

  std::vector<PredicatePath> chains;
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt < options.retries && chains.empty(); ++attempt) {
    try {
      if (numbered.chain_count() == 1) {
        chains.push_back(
            sample_unidirectional_path(graph, start_of(0), constraints(0), rng, options.policy));
      } else if (numbered.chain_count() == 2) {
        const auto start_a = start_of(0);
        const auto start_b = start_of(1);
        auto [a, b] = sample_bidirectional_pair(graph, start_a, constraints(0), start_b,
                                                constraints(1), rng, options.bidirectional);
        chains.push_back(std::move(a));
        chains.push_back(std::move(b));
      } else {
        throw StructuralError(fmt::format("template {} has {} entity chains", numbered.base.id,
                                          numbered.chain_count()));
      }
    } catch (const DeadEndError& e) {
      last_error = e.what();
    }
  }
  if (chains.empty()) {
    throw DeadEndError(fmt::format("template {}: retry budget spent ({})", numbered.base.id,
                                   last_error),
                       PredicatePath{});
  }

  TypedTemplate typed;
  typed.numbered = numbered;
  typed.tokens = numbered.tokens;
  for (std::size_t i = 0; i < typed.tokens.size(); ++i) {
    auto& tok = typed.tokens[i];
    if (tok.kind == Kind::Thing) {
      typed.entity_slots.push_back({i, chains[static_cast<std::size_t>(tok.chain)].start_type});
    } else if (tok.kind == Kind::Predicate) {
      tok.signature = chains[static_cast<std::size_t>(tok.chain)]
                          .steps[static_cast<std::size_t>(tok.index)]
                          .signature;
    }
  }
  typed.wh_range_type = chains.front().end_type();
  typed.chains = std::move(chains);
  return typed;
}

}  // namespace

TypedTemplate assign_types(const NumberedTemplate& numbered, const TypeGraph& graph,
                           const std::vector<std::string>& entity_type_pool, Rng& rng,
                           const TypingOptions& options) {
  if (entity_type_pool.empty()) throw ContractError("entity type pool is empty");
  return type_chains(
      numbered, graph,
      [&](std::size_t) { return entity_type_pool[rng.uniform(entity_type_pool.size())]; }, rng,
      options);
}

TypedTemplate assign_types_from(const NumberedTemplate& numbered, const TypeGraph& graph,
                                const std::vector<std::string>& start_types, Rng& rng,
                                const TypingOptions& options) {
  if (start_types.size() != numbered.chain_count())
    throw ContractError(fmt::format("template {} has {} chains but {} start types were given",
                                    numbered.base.id, numbered.chain_count(), start_types.size()));
  return type_chains(numbered, graph, [&](std::size_t c) { return start_types[c]; }, rng, options);
}

nlohmann::ordered_json to_json(const TypedTemplate& t) {
  nlohmann::ordered_json j;
  j["template_id"] = t.id();
  j["type"] = to_string(t.question_type());
  j["depth"] = t.depth();
  j["baseline"] = t.numbered.base.text();
  j["numbered"] = t.numbered.text();
  j["typed"] = t.text();
  auto chains = nlohmann::ordered_json::array();
  for (const auto& path : t.chains) {
    auto steps = nlohmann::ordered_json::array();
    for (const auto& s : path.steps) steps.push_back(s.signature.from + "->" + s.signature.to);
    chains.push_back({{"start_type", path.start_type}, {"steps", steps}});
  }
  j["chains"] = std::move(chains);
  j["wh_range_type"] = t.wh_range_type;
  return j;
}

}  // namespace squit
