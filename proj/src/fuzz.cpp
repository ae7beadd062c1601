#include "squit/fuzz.hpp"

#include <algorithm>
#include <cctype>

#include "squit/error.hpp"

namespace squit {

namespace {

std::size_t char_len(const std::string& s, std::size_t at) {
  const auto lead = static_cast<unsigned char>(s[at]);
  std::size_t n = 1;
  if (lead >= 0xF0) n = 4;
  else if (lead >= 0xE0) n = 3;
  else if (lead >= 0xC0) n = 2;
  // Stop early on truncated sequences.
  std::size_t k = 1;
  while (k < n && at + k < s.size() && (static_cast<unsigned char>(s[at + k]) & 0xC0) == 0x80) ++k;
  return k;
}

bool overlaps(const std::vector<Span>& spans, std::size_t begin, std::size_t length) {
  return std::any_of(spans.begin(), spans.end(), [&](const Span& s) {
    return begin < s.end() && s.begin < begin + length;
  });
}

void shift_spans(std::vector<Span>& spans, std::size_t from, std::ptrdiff_t delta) {
  for (auto& s : spans)
    if (s.begin >= from) s.begin = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s.begin) + delta);
}

bool in_range(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void FuzzConfig::validate() const {
  if (!in_range(filler_prob) || !in_range(case_prob) || !in_range(char_noise_prob))
    throw ConfigError("fuzz probabilities must lie in [0, 1]");
  if (filler_prob > 0 && filler_list.empty())
    throw ConfigError("fuzz filler_list is empty but filler_prob > 0");
}

FuzzConfig FuzzConfig::test_hard_defaults() {
  FuzzConfig c;
  c.filler_prob = 0.5;
  c.case_prob = 0.1;
  c.char_noise_prob = 0.01;
  return c;
}

bool add_filler(FuzzText& q, const FuzzConfig& config, Rng& rng) {
  if (!rng.bernoulli(config.filler_prob)) return false;
  const auto& filler = config.filler_list[rng.uniform(config.filler_list.size())];
  const std::string prefix = filler + " ";
  q.text.insert(0, prefix);
  shift_spans(q.protected_spans, 0, static_cast<std::ptrdiff_t>(prefix.size()));
  return true;
}

std::size_t perturb_case(FuzzText& q, const FuzzConfig& config, Rng& rng) {
  std::size_t flips = 0;
  std::size_t i = 0;
  while (i < q.text.size()) {
    if (std::isspace(static_cast<unsigned char>(q.text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < q.text.size() && !std::isspace(static_cast<unsigned char>(q.text[i]))) ++i;
    const bool hit = rng.bernoulli(config.case_prob);
    auto& c = q.text[start];
    const auto uc = static_cast<unsigned char>(c);
    if (!hit || !std::isalpha(uc) || overlaps(q.protected_spans, start, 1)) continue;
    c = static_cast<char>(std::isupper(uc) ? std::tolower(uc) : std::toupper(uc));
    ++flips;
  }
  return flips;
}

void apply_char_edit(FuzzText& q, std::size_t at, CharEdit edit) {
  if (at >= q.text.size()) throw ContractError("character edit past end of text");
  const std::size_t len = char_len(q.text, at);
  switch (edit) {
    case CharEdit::Swap: {
      const std::size_t next = at + len;
      if (next >= q.text.size()) throw ContractError("swap needs a following character");
      const std::size_t next_len = char_len(q.text, next);
      std::string first = q.text.substr(at, len);
      std::string second = q.text.substr(next, next_len);
      q.text.replace(at, len + next_len, second + first);
      break;
    }
    case CharEdit::Delete:
      q.text.erase(at, len);
      shift_spans(q.protected_spans, at + 1, -static_cast<std::ptrdiff_t>(len));
      break;
    case CharEdit::Duplicate:
      q.text.insert(at, q.text.substr(at, len));
      shift_spans(q.protected_spans, at + 1, static_cast<std::ptrdiff_t>(len));
      break;
  }
}

std::size_t noise_eligible_chars(const FuzzText& q) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < q.text.size();) {
    const std::size_t len = char_len(q.text, i);
    if (!overlaps(q.protected_spans, i, len)) ++n;
    i += len;
  }
  return n;
}

std::size_t char_noise(FuzzText& q, const FuzzConfig& config, Rng& rng) {
  if (config.char_noise_prob <= 0) return 0;
  std::size_t edits = 0;
  std::size_t pos = 0;
  while (pos < q.text.size()) {
    const std::size_t len = char_len(q.text, pos);
    if (overlaps(q.protected_spans, pos, len) || !rng.bernoulli(config.char_noise_prob)) {
      pos += len;
      continue;
    }
    const std::size_t next = pos + len;
    const bool can_swap = next < q.text.size() &&
                          !overlaps(q.protected_spans, next, char_len(q.text, next));
    CharEdit edit;
    if (can_swap) {
      static constexpr CharEdit kAll[] = {CharEdit::Swap, CharEdit::Delete, CharEdit::Duplicate};
      edit = kAll[rng.uniform(3)];
    } else {
      edit = rng.uniform(2) == 0 ? CharEdit::Delete : CharEdit::Duplicate;
    }
    const std::size_t next_len = can_swap ? char_len(q.text, next) : 0;
    apply_char_edit(q, pos, edit);
    ++edits;
    switch (edit) {
      case CharEdit::Swap: pos += len + next_len; break;
      case CharEdit::Delete: break;
      case CharEdit::Duplicate: pos += 2 * len; break;
    }
  }
  return edits;
}

FuzzReport fuzz_question(FuzzText& q, const FuzzConfig& config, Rng& rng) {
  FuzzReport r;
  r.filler_added = add_filler(q, config, rng);
  r.case_flips = perturb_case(q, config, rng);
  r.char_edits = char_noise(q, config, rng);
  return r;
}

FuzzReport fuzz_pair(QAPair& pair, const FuzzConfig& config, Rng& rng) {
  FuzzText q{pair.question, std::move(pair.entity_spans)};
  auto report = fuzz_question(q, config, rng);
  // Predicate mention offsets do not survive editing.
  if (q.text != pair.question) pair.predicate_mentions.clear();
  pair.question = std::move(q.text);
  pair.entity_spans = std::move(q.protected_spans);
  return report;
}

std::vector<Span> locate_entity_spans(const std::string& question, const std::string& query) {
  std::vector<Span> spans;
  for (const auto& label : query_entity_labels(query)) {
    if (label.empty()) continue;
    for (auto at = question.find(label); at != std::string::npos; at = question.find(label, at + 1)) {
      if (!overlaps(spans, at, label.size())) {
        spans.push_back({at, label.size()});
        break;
      }
    }
  }
  return spans;
}

}  // namespace squit
