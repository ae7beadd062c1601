#include "squit/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>

#include <fmt/format.h>

#include "squit/error.hpp"

namespace squit {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_spaced_punct(char c) {
  return c == '{' || c == '}' || c == '(' || c == ')' || c == '.' || c == '/' || c == ']';
}

std::map<Tokens, std::size_t> ngram_counts(const Tokens& toks, int n) {
  std::map<Tokens, std::size_t> counts;
  const auto un = static_cast<std::size_t>(n);
  if (toks.size() < un) return counts;
  for (std::size_t i = 0; i + un <= toks.size(); ++i)
    ++counts[Tokens(toks.begin() + static_cast<std::ptrdiff_t>(i),
                    toks.begin() + static_cast<std::ptrdiff_t>(i + un))];
  return counts;
}

double f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

class SubsetParser {
 public:
  explicit SubsetParser(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && is_space(text[i])) ++i;
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j])) ++j;
      if (j > i) {
        toks_.emplace_back(text.substr(i, j - i));
        offsets_.push_back(i);
      }
      i = j;
    }
    end_offset_ = text.size();
  }

  SubsetParse run() {
    try {
      query();
      if (pos_ != toks_.size()) fail("end of query");
      return {};
    } catch (const SubsetParse& err) {
      return err;
    }
  }

 private:
  void query() {
    if (accept("SELECT")) {
      if (accept("?end")) {
        expect("WHERE");
        expect("{");
        if (peek() == "BIND") bind();
        else triple();
        expect("}");
      } else if (peek() == "(") {
        for (auto w : {"(", "COUNT", "(", "DISTINCT", "?end", ")", "as", "?endcount", ")", "WHERE", "{"})
          expect(w);
        triple();
        expect("}");
      } else {
        fail("?end or (");
      }
    } else if (accept("ASK")) {
      expect("{");
      if (peek() == "BIND") bind();
      else triple();
      triple();
      expect("}");
    } else {
      fail("SELECT or ASK");
    }
  }

  void entity() {
    expect("[");
    if (peek() == "]" || at_end()) fail("entity label");
    while (!at_end() && peek() != "]") ++pos_;
    expect("]");
  }

  void predicate() {
    static const std::regex re(R"(wdt:P[0-9]+)");
    if (at_end() || !std::regex_match(toks_[pos_], re)) fail("wdt:P<digits>");
    ++pos_;
  }

  void triple() {
    entity();
    predicate();
    while (accept("/")) predicate();
    expect("?end");
    expect(".");
  }

  void bind() {
    for (auto w : {"BIND", "("}) expect(w);
    entity();
    for (auto w : {"as", "?end", ")", "."}) expect(w);
  }

  bool at_end() const { return pos_ >= toks_.size(); }
  std::string_view peek() const { return at_end() ? std::string_view{} : toks_[pos_]; }
  bool accept(std::string_view w) {
    if (!at_end() && toks_[pos_] == w) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view w) {
    if (!accept(w)) fail(fmt::format("'{}'", w));
  }
  [[noreturn]] void fail(const std::string& expected) const {
    SubsetParse err;
    err.ok = false;
    err.token_index = pos_;
    err.token = at_end() ? "<end>" : toks_[pos_];
    err.offset = at_end() ? end_offset_ : offsets_[pos_];
    err.message = fmt::format("unexpected token '{}' at token {}, expected {}", err.token, pos_, expected);
    throw err;
  }

  std::vector<std::string> toks_;
  std::vector<std::size_t> offsets_;
  std::size_t end_offset_ = 0;
  std::size_t pos_ = 0;
};

}  // namespace

std::string normalize_query(std::string_view text) {
  std::string spaced;
  spaced.reserve(text.size() + 16);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '[') {
      spaced += " [ ";
      std::size_t close = text.find(']', i + 1);
      if (close == std::string_view::npos) close = text.size();
      for (std::size_t k = i + 1; k < close; ++k) spaced += is_space(text[k]) ? ' ' : text[k];
      i = close - 1;
    } else if (is_spaced_punct(c)) {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += is_space(c) ? ' ' : c;
    }
  }
  std::string out;
  for (const auto& tok : tokenize(spaced)) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

SubsetParse validate_sparql_subset(std::string_view text) { return SubsetParser(text).run(); }

std::pair<std::size_t, std::size_t> modified_precision(const Tokens& candidate,
                                                       const Tokens& reference, int n) {
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  std::size_t matches = 0, total = 0;
  for (const auto& [gram, count] : cand) {
    total += count;
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return {matches, total};
}

double bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
            const BleuOptions& options) {
  if (candidates.size() != references.size())
    throw ContractError(fmt::format("bleu: {} candidates but {} references", candidates.size(),
                                    references.size()));
  if (candidates.empty()) throw ContractError("bleu: empty corpus");
  if (options.max_order < 1) throw ContractError("bleu: max_order must be at least 1");

  const auto orders = static_cast<std::size_t>(options.max_order);
  std::vector<std::size_t> matches(orders, 0), totals(orders, 0);
  std::size_t cand_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += candidates[i].size();
    ref_len += references[i].size();
    for (std::size_t n = 1; n <= orders; ++n) {
      auto [m, t] = modified_precision(candidates[i], references[i], static_cast<int>(n));
      matches[n - 1] += m;
      totals[n - 1] += t;
    }
  }
  if (cand_len == 0) return 0.0;

  double log_sum = 0;
  for (std::size_t n = 1; n <= orders; ++n) {
    double num = static_cast<double>(matches[n - 1]);
    double den = static_cast<double>(totals[n - 1]);
    if (options.smoothing && n >= 2) {
      num += 1;
      den += 1;
    }
    if (num == 0 || den == 0) return 0.0;
    log_sum += std::log(num / den) / static_cast<double>(orders);
  }
  const double bp = cand_len > ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum);
}

double rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  if (n < 1) throw ContractError("rouge_n: n must be at least 1");
  auto [overlap, cand_total] = modified_precision(candidate, reference, n);
  const auto un = static_cast<std::size_t>(n);
  if (reference.size() < un || cand_total == 0 || overlap == 0) return 0.0;
  const double ref_total = static_cast<double>(reference.size() - un + 1);
  return f1(static_cast<double>(overlap) / static_cast<double>(cand_total),
            static_cast<double>(overlap) / ref_total);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  return f1(lcs / static_cast<double>(candidate.size()), lcs / static_cast<double>(reference.size()));
}

double weighted_lcs(const Tokens& a, const Tokens& b, double weight_exponent) {
  auto f = [&](double k) { return std::pow(k, weight_exponent); };
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n + 1, 0.0));
  std::vector<std::vector<std::size_t>> w(m + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (a[i - 1] == b[j - 1]) {
        const auto k = static_cast<double>(w[i - 1][j - 1]);
        c[i][j] = c[i - 1][j - 1] + f(k + 1) - f(k);
        w[i][j] = w[i - 1][j - 1] + 1;
      } else if (c[i - 1][j] > c[i][j - 1]) {
        c[i][j] = c[i - 1][j];
      } else {
        c[i][j] = c[i][j - 1];
      }
    }
  }
  return c[m][n];
}

double rouge_w(const Tokens& candidate, const Tokens& reference, double weight_exponent) {
  if (weight_exponent <= 1.0) throw ContractError("rouge_w: weight exponent must exceed 1");
  if (candidate.empty() || reference.empty()) return 0.0;
  const double wlcs = weighted_lcs(candidate, reference, weight_exponent);
  auto f = [&](double k) { return std::pow(k, weight_exponent); };
  auto f_inv = [&](double x) { return std::pow(x, 1.0 / weight_exponent); };
  const double r = f_inv(wlcs / f(static_cast<double>(reference.size())));
  const double p = f_inv(wlcs / f(static_cast<double>(candidate.size())));
  return f1(p, r);
}

MetricsReport score_pairs(const std::vector<std::string>& predictions,
                          const std::vector<std::string>& golds, const ScoreOptions& options) {
  if (predictions.size() != golds.size())
    throw ContractError(fmt::format("line count mismatch: {} predictions, {} gold",
                                    predictions.size(), golds.size()));
  if (predictions.empty()) throw ContractError("empty corpus");
  std::vector<Tokens> cands, refs;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    cands.push_back(tokenize(options.normalize ? normalize_query(predictions[i]) : predictions[i]));
    refs.push_back(tokenize(options.normalize ? normalize_query(golds[i]) : golds[i]));
  }
  MetricsReport r;
  r.n = cands.size();
  r.bleu = bleu(cands, refs, options.bleu);
  for (std::size_t i = 0; i < r.n; ++i) {
    r.rouge_1 += rouge_n(cands[i], refs[i], 1);
    r.rouge_2 += rouge_n(cands[i], refs[i], 2);
    r.rouge_l += rouge_l(cands[i], refs[i]);
    r.rouge_w += rouge_w(cands[i], refs[i], options.rouge_w_exponent);
  }
  const auto n = static_cast<double>(r.n);
  r.rouge_1 /= n;
  r.rouge_2 /= n;
  r.rouge_l /= n;
  r.rouge_w /= n;
  return r;
}

MetricsReport score_corpus(const std::string& pred_path, const std::string& gold_path,
                           const ScoreOptions& options) {
  return score_pairs(read_lines(pred_path), read_lines(gold_path), options);
}

std::string format_report(const MetricsReport& r, std::string_view dataset) {
  return fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}{:>10}\n{:<12}{:>10.5f}{:>10.5f}{:>10.5f}{:>10.5f}{:>10.5f}\n",
                     "Dataset", "BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "ROUGE-W", dataset, r.bleu,
                     r.rouge_1, r.rouge_2, r.rouge_l, r.rouge_w);
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  return {{"bleu", r.bleu}, {"rouge_1", r.rouge_1}, {"rouge_2", r.rouge_2},
          {"rouge_l", r.rouge_l}, {"rouge_w", r.rouge_w}, {"n", r.n}};
}

}  // namespace squit
