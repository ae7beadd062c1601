#include "oracles.hpp"

#include <deque>
#include <sstream>

namespace squit::testing {

std::map<std::vector<std::string>, int> bfs_expand(const Grammar& grammar, int max_depth) {
  struct Item {
    std::string text;
    bool terminal;
    int level;
  };
  struct Form {
    std::vector<Item> items;
    int height;
  };
  std::map<std::vector<std::string>, int> out;
  std::deque<Form> queue;
  queue.push_back({{{grammar.start_symbol, false, 1}}, 1});
  while (!queue.empty()) {
    Form form = std::move(queue.front());
    queue.pop_front();
    std::size_t at = 0;
    while (at < form.items.size() && form.items[at].terminal) ++at;
    if (at == form.items.size()) {
      std::vector<std::string> tokens;
      for (const auto& item : form.items) {
        std::istringstream in(item.text);
        for (std::string tok; in >> tok;) tokens.push_back(tok);
      }
      auto [it, inserted] = out.emplace(tokens, form.height);
      if (!inserted && form.height < it->second) it->second = form.height;
      continue;
    }
    const Item nt = form.items[at];
    for (const auto& alt : grammar.rules.at(nt.text)) {
      bool has_nonterminal = false;
      for (const auto& sym : alt) has_nonterminal |= !sym.terminal;
      if (has_nonterminal && nt.level + 1 > max_depth) continue;
      Form next;
      next.height = form.height;
      next.items.assign(form.items.begin(), form.items.begin() + static_cast<std::ptrdiff_t>(at));
      for (const auto& sym : alt) {
        next.items.push_back({sym.text, sym.terminal, nt.level + 1});
        if (!sym.terminal) next.height = std::max(next.height, nt.level + 1);
      }
      next.items.insert(next.items.end(), form.items.begin() + static_cast<std::ptrdiff_t>(at) + 1,
                        form.items.end());
      queue.push_back(std::move(next));
    }
  }
  return out;
}

namespace {

bool chain_from(const std::vector<PredicateRecord>& predicates, const std::string& type,
                const std::vector<std::string>& ids, std::size_t i) {
  if (i == ids.size()) return true;
  for (const auto& p : predicates)
    if (p.id == ids[i] && p.domain_type == type && chain_from(predicates, p.range_type, ids, i + 1))
      return true;
  return false;
}

class SkeletonParser {
 public:
  explicit SkeletonParser(const std::vector<std::string>& t) : t_(t) {}

  std::optional<std::vector<std::size_t>> parse() {
    if (!eat("[WH]")) return std::nullopt;
    if (!eat("is") && !eat("was")) return std::nullopt;
    std::vector<std::size_t> order;
    if (!noun_phrase(order)) return std::nullopt;
    if (pos_ < t_.size() && t_[pos_] == "[VERB-ADP]") order.push_back(pos_++);
    if (!eat("?") || pos_ != t_.size()) return std::nullopt;
    return order;
  }

 private:
  bool eat(const std::string& w) {
    if (pos_ < t_.size() && t_[pos_] == w) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool slot() const { return pos_ < t_.size() && t_[pos_] == "[NOUN]"; }

  // Wrappers are applied after everything inside them, possessives included.
  bool noun_phrase(std::vector<std::size_t>& order) {
    if (pos_ + 2 < t_.size() && t_[pos_] == "the" && t_[pos_ + 1] == "[NOUN]" && t_[pos_ + 2] == "of") {
      const std::size_t wrapper = pos_ + 1;
      pos_ += 3;
      if (!noun_phrase(order)) return false;
      order.push_back(wrapper);
      return true;
    }
    if (!eat("[THING]")) return false;
    while (pos_ + 1 < t_.size() && t_[pos_] == "'s" && t_[pos_ + 1] == "[NOUN]") {
      order.push_back(pos_ + 1);
      pos_ += 2;
    }
    return true;
  }

  const std::vector<std::string>& t_;
  std::size_t pos_ = 0;
};

}  // namespace

bool brute_force_chain_valid(const std::vector<PredicateRecord>& predicates,
                             const std::string& start_type, const std::vector<std::string>& ids) {
  return chain_from(predicates, start_type, ids, 0);
}

std::optional<std::vector<std::size_t>> single_entity_application_order(
    const std::vector<std::string>& tokens) {
  return SkeletonParser(tokens).parse();
}

}  // namespace squit::testing
