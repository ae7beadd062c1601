#include "squit/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "squit/error.hpp"
#include "squit/kb.hpp"

namespace squit {

namespace {

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class LineScanner {
 public:
  LineScanner(std::string_view line, const std::string& source, std::size_t line_no)
      : line_(line), source_(source), line_no_(line_no) {}

  void skip_space() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= line_.size() || line_[pos_] == '#';
  }
  bool accept(std::string_view lit) {
    skip_space();
    if (line_.substr(pos_, lit.size()) == lit) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }
  char peek() {
    skip_space();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }
  std::string name() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < line_.size() && is_name_char(line_[pos_])) {
      // "->" ends a name even without surrounding space.
      if (line_[pos_] == '-' && pos_ + 1 < line_.size() && line_[pos_ + 1] == '>') break;
      ++pos_;
    }
    if (start == pos_) fail("expected a nonterminal name");
    return std::string(line_.substr(start, pos_ - start));
  }
  std::string quoted() {
    skip_space();
    if (pos_ >= line_.size() || line_[pos_] != '"') fail("expected a quoted terminal");
    ++pos_;
    std::string out;
    while (pos_ < line_.size() && line_[pos_] != '"') {
      if (line_[pos_] == '\\' && pos_ + 1 < line_.size()) ++pos_;
      out += line_[pos_++];
    }
    if (pos_ >= line_.size()) fail("unterminated terminal string");
    ++pos_;
    return out;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, line_no_, what + " (column " + std::to_string(pos_ + 1) + ")");
  }

 private:
  std::string_view line_;
  const std::string& source_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

std::vector<Alternative> parse_alternatives(LineScanner& scan) {
  std::vector<Alternative> alts(1);
  while (!scan.done()) {
    if (scan.accept("|")) {
      if (alts.back().empty()) scan.fail("empty alternative");
      alts.emplace_back();
      continue;
    }
    if (scan.peek() == '"') {
      std::string text = scan.quoted();
      if (split_tokens(text).empty()) scan.fail("empty terminal");
      alts.back().push_back({std::move(text), true});
    } else {
      alts.back().push_back({scan.name(), false});
    }
  }
  if (alts.back().empty()) scan.fail("empty alternative");
  return alts;
}

// Enumerated strings for one (nonterminal, height bound) pair.
struct Derivations {
  std::vector<std::vector<std::string>> strings;
  std::vector<int> heights;
};

class Enumerator {
 public:
  Enumerator(const Grammar& g, std::size_t cap) : g_(g), cap_(cap) {}

  const Derivations& derive(const std::string& nt, int bound) {
    auto key = nt + '\x1f' + std::to_string(bound);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    Derivations out;
    if (bound >= 1) {
      std::map<std::vector<std::string>, std::size_t> index;
      for (const auto& alt : g_.rules.at(nt)) {
        // Options per symbol; terminals have one option of height 0.
        std::vector<const Derivations*> parts;
        std::vector<Derivations> owned;
        owned.reserve(alt.size());
        for (const auto& sym : alt) {
          if (sym.terminal) {
            owned.push_back({{split_tokens(sym.text)}, {0}});
            parts.push_back(&owned.back());
          } else {
            parts.push_back(&derive(sym.text, bound - 1));
          }
        }
        product(parts, 0, {}, 0, out, index);
      }
    }
    return memo_.emplace(std::move(key), std::move(out)).first->second;
  }

 private:
  void product(const std::vector<const Derivations*>& parts, std::size_t i,
               std::vector<std::string> prefix, int max_child, Derivations& out,
               std::map<std::vector<std::string>, std::size_t>& index) {
    if (i == parts.size()) {
      const int height = max_child + 1;
      auto [it, inserted] = index.try_emplace(prefix, out.strings.size());
      if (inserted) {
        if (out.strings.size() >= cap_)
          throw ContractError(fmt::format("grammar {} yields more than {} templates", g_.name, cap_));
        out.strings.push_back(std::move(prefix));
        out.heights.push_back(height);
      } else {
        out.heights[it->second] = std::min(out.heights[it->second], height);
      }
      return;
    }
    const auto& d = *parts[i];
    for (std::size_t k = 0; k < d.strings.size(); ++k) {
      auto next = prefix;
      next.insert(next.end(), d.strings[k].begin(), d.strings[k].end());
      product(parts, i + 1, std::move(next), std::max(max_child, d.heights[k]), out, index);
    }
  }

  const Grammar& g_;
  std::size_t cap_;
  std::unordered_map<std::string, Derivations> memo_;
};

}  // namespace

std::string_view to_string(QuestionType type) {
  switch (type) {
    case QuestionType::SingleEntity: return "SingleEntity";
    case QuestionType::MultiEntity: return "MultiEntity";
    case QuestionType::Count: return "Count";
  }
  return "SingleEntity";
}

std::optional<QuestionType> parse_question_type(std::string_view text) {
  if (text == "SingleEntity") return QuestionType::SingleEntity;
  if (text == "MultiEntity") return QuestionType::MultiEntity;
  if (text == "Count") return QuestionType::Count;
  return std::nullopt;
}

std::size_t Grammar::terminal_count() const {
  std::set<std::string> terminals;
  for (const auto& [nt, alts] : rules)
    for (const auto& alt : alts)
      for (const auto& sym : alt)
        if (sym.terminal) terminals.insert(sym.text);
  return terminals.size();
}

Grammar parse_grammar(std::string_view text, std::string name) {
  Grammar g;
  g.name = std::move(name);
  std::string last_lhs;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> first_use;  // nonterminal -> line

  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LineScanner scan(line, g.name, line_no);
    if (scan.done()) continue;

    if (scan.accept("@type")) {
      auto type = parse_question_type(scan.name());
      if (!type) scan.fail("unknown question type");
      g.question_type = *type;
      if (!scan.done()) scan.fail("unexpected text after @type");
      continue;
    }

    std::string lhs;
    if (scan.peek() == '|') {
      if (last_lhs.empty()) scan.fail("continuation line without a rule");
      lhs = last_lhs;
      scan.accept("|");
    } else {
      lhs = scan.name();
      if (!scan.accept("->")) scan.fail("expected '->'");
    }
    auto alts = parse_alternatives(scan);
    for (const auto& alt : alts)
      for (const auto& sym : alt)
        if (!sym.terminal) first_use.try_emplace(sym.text, line_no);

    if (g.start_symbol.empty()) g.start_symbol = lhs;
    auto [it, inserted] = g.rules.try_emplace(lhs);
    if (inserted) g.nonterminals.push_back(lhs);
    it->second.insert(it->second.end(), alts.begin(), alts.end());
    last_lhs = lhs;
  }

  if (g.start_symbol.empty()) throw ValidationError(g.name + ": grammar has no rules");
  for (const auto& [nt, line_used] : first_use) {
    if (!g.rules.contains(nt))
      throw ValidationError(fmt::format("{}:{}: undefined nonterminal {}", g.name, line_used, nt));
  }

  std::set<std::string> reachable{g.start_symbol};
  std::vector<std::string> stack{g.start_symbol};
  while (!stack.empty()) {
    auto nt = stack.back();
    stack.pop_back();
    for (const auto& alt : g.rules.at(nt))
      for (const auto& sym : alt)
        if (!sym.terminal && reachable.insert(sym.text).second) stack.push_back(sym.text);
  }
  for (const auto& nt : g.nonterminals)
    if (!reachable.contains(nt)) g.warnings.push_back(g.name + ": unreachable nonterminal " + nt);
  return g;
}

Grammar load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open grammar");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return parse_grammar(buf.str(), name);
}

std::string BaselineTemplate::text() const {
  std::string out;
  for (const auto& tok : tokens) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

bool is_predicate_slot(std::string_view token) {
  return token.size() > 2 && token.front() == '[' && token.back() == ']' && token != kWhSlot &&
         token != kThingSlot;
}

std::vector<BaselineTemplate> enumerate_templates(const Grammar& grammar, int max_depth,
                                                  std::size_t max_templates) {
  if (max_depth < 1) throw ContractError("max_depth must be at least 1");
  Enumerator e(grammar, max_templates);
  const auto& d = e.derive(grammar.start_symbol, max_depth);
  std::vector<BaselineTemplate> out;
  out.reserve(d.strings.size());
  for (std::size_t i = 0; i < d.strings.size(); ++i) {
    out.push_back({fmt::format("{}#{}", grammar.name, i), d.strings[i], d.heights[i],
                   grammar.question_type});
  }
  return out;
}

std::optional<std::string> check_template(const BaselineTemplate& t) {
  std::size_t things = 0, slots = 0, whs = 0;
  for (const auto& tok : t.tokens) {
    if (tok == kThingSlot) ++things;
    else if (tok == kWhSlot) ++whs;
    else if (is_predicate_slot(tok)) {
      ++slots;
      if (!parse_pos(std::string_view(tok).substr(1, tok.size() - 2)))
        return fmt::format("template '{}' has unknown slot {}", t.text(), tok);
    }
  }
  const std::size_t want_things = t.question_type == QuestionType::MultiEntity ? 2 : 1;
  if (things != want_things)
    return fmt::format("{} template '{}' has {} [THING] slots, expected {}",
                       to_string(t.question_type), t.text(), things, want_things);
  // Single-entity templates may have no predicate; that is the BIND form.
  if (slots == 0 && t.question_type != QuestionType::SingleEntity)
    return fmt::format("template '{}' has no predicate slot", t.text());
  if (whs > 1) return fmt::format("template '{}' has more than one [WH] slot", t.text());
  return std::nullopt;
}

TemplateStats template_stats(const std::vector<BaselineTemplate>& templates) {
  TemplateStats s;
  s.count = templates.size();
  double total = 0;
  for (const auto& t : templates) {
    total += t.depth;
    ++s.per_type[t.question_type];
    ++s.depth_histogram[t.depth];
  }
  if (s.count > 0) s.mean_depth = total / static_cast<double>(s.count);
  return s;
}

std::string format_template_stats(const TemplateStats& stats) {
  std::string out = fmt::format("templates: {}\nmean depth: {:.2f}\n", stats.count, stats.mean_depth);
  for (auto type : {QuestionType::SingleEntity, QuestionType::MultiEntity, QuestionType::Count}) {
    auto it = stats.per_type.find(type);
    out += fmt::format("  {}: {}\n", to_string(type), it == stats.per_type.end() ? 0 : it->second);
  }
  for (const auto& [depth, n] : stats.depth_histogram) out += fmt::format("  depth {}: {}\n", depth, n);
  return out;
}

}  // namespace squit
