#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "squit/constructor.hpp"
#include "squit/rng.hpp"

namespace squit {

struct FuzzConfig {
  double filler_prob = 0.0;
  std::vector<std::string> filler_list = {"Hey", "Do you know", "Tell me"};
  double case_prob = 0.0;
  double char_noise_prob = 0.0;
  std::uint64_t salt = 0x66757a7aULL;

  // Throws ConfigError on out-of-range probabilities or an empty filler list
  // with filler_prob > 0.
  void validate() const;
  bool is_identity() const { return filler_prob == 0 && case_prob == 0 && char_noise_prob == 0; }

  static FuzzConfig test_hard_defaults();
};

// Question text plus byte spans that must survive fuzzing unchanged.
struct FuzzText {
  std::string text;
  std::vector<Span> protected_spans;
};

enum class CharEdit { Swap, Delete, Duplicate };

struct FuzzReport {
  bool filler_added = false;
  std::size_t case_flips = 0;
  std::size_t char_edits = 0;
};

// Prepends "<filler> " with probability filler_prob. One draw for the coin,
// one for the filler choice when it lands.
bool add_filler(FuzzText& q, const FuzzConfig& config, Rng& rng);

// Flips the case of each word's first letter with probability case_prob.
// Exactly one draw per word, protected or not.
std::size_t perturb_case(FuzzText& q, const FuzzConfig& config, Rng& rng);

// Per character outside protected spans, with probability char_noise_prob,
// swaps it with the next character, deletes it, or doubles it.
std::size_t char_noise(FuzzText& q, const FuzzConfig& config, Rng& rng);

// Applies one edit at the character starting at byte `at`; used by
// char_noise and directly by tests.
void apply_char_edit(FuzzText& q, std::size_t at, CharEdit edit);

// Number of characters char_noise may touch.
std::size_t noise_eligible_chars(const FuzzText& q);

// filler, then case, then character noise, all from one stream.
FuzzReport fuzz_question(FuzzText& q, const FuzzConfig& config, Rng& rng);

// Fuzzes pair.question in place, protecting pair.entity_spans. The query is
// never touched.
FuzzReport fuzz_pair(QAPair& pair, const FuzzConfig& config, Rng& rng);

// Recovers entity spans of a serialized pair from the bracketed labels in its
// query (first occurrence of each label, left to right).
std::vector<Span> locate_entity_spans(const std::string& question, const std::string& query);

}  // namespace squit
