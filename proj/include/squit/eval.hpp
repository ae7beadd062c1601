#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace squit {

using Tokens = std::vector<std::string>;

// Collapses whitespace and puts single spaces around { } ( ) . / [ ].
// Text inside "[ ... ]" is an entity label: only its whitespace is collapsed.
// Idempotent.
std::string normalize_query(std::string_view text);

Tokens tokenize(std::string_view text);

struct SubsetParse {
  bool ok = true;
  std::size_t token_index = 0;  // first offending token
  std::size_t offset = 0;       // its byte offset in the input
  std::string token;            // "<end>" past the last token
  std::string message;
};

// Accepts exactly the generated query shapes:
//   SELECT ?end WHERE { TRIPLE }
//   SELECT ?end WHERE { BIND }
//   SELECT ( COUNT ( DISTINCT ?end ) as ?endcount ) WHERE { TRIPLE }
//   ASK { BIND TRIPLE }
//   ASK { TRIPLE TRIPLE }
// with TRIPLE = [ label ] wdt:P<n> ( / wdt:P<n> )* ?end .
// and  BIND   = BIND ( [ label ] as ?end ) .
SubsetParse validate_sparql_subset(std::string_view text);

struct BleuOptions {
  int max_order = 4;
  bool smoothing = false;  // add-one on orders >= 2
};

// Clipped n-gram precision of one pair, as (matches, candidate n-grams).
std::pair<std::size_t, std::size_t> modified_precision(const Tokens& candidate,
                                                       const Tokens& reference, int n);

// Corpus BLEU with uniform weights and the standard brevity penalty.
double bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
            const BleuOptions& options = {});

double rouge_n(const Tokens& candidate, const Tokens& reference, int n);
double rouge_l(const Tokens& candidate, const Tokens& reference);
double rouge_w(const Tokens& candidate, const Tokens& reference, double weight_exponent = 1.2);

// Weighted LCS value with f(k) = k^exponent.
double weighted_lcs(const Tokens& a, const Tokens& b, double weight_exponent);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

struct MetricsReport {
  double bleu = 0;
  double rouge_1 = 0;
  double rouge_2 = 0;
  double rouge_l = 0;
  double rouge_w = 0;
  std::size_t n = 0;
};

struct ScoreOptions {
  bool normalize = true;
  BleuOptions bleu;
  double rouge_w_exponent = 1.2;
};

MetricsReport score_pairs(const std::vector<std::string>& predictions,
                          const std::vector<std::string>& golds, const ScoreOptions& options = {});
MetricsReport score_corpus(const std::string& pred_path, const std::string& gold_path,
                           const ScoreOptions& options = {});

std::string format_report(const MetricsReport& report, std::string_view dataset = "corpus");
nlohmann::ordered_json to_json(const MetricsReport& report);

}  // namespace squit
