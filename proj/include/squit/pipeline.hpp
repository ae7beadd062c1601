#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "squit/config.hpp"
#include "squit/constructor.hpp"
#include "squit/error.hpp"
#include "squit/fuzz.hpp"
#include "squit/grammar.hpp"
#include "squit/kb.hpp"
#include "squit/template_gen.hpp"
#include "squit/typegraph.hpp"

namespace squit {

struct SplitRecipe {
  std::string name = "split";
  std::size_t target_count = 1;
  std::vector<std::string> grammars;  // paths
  int max_depth = 5;
  std::vector<std::string> entity_domains;
  std::vector<std::string> predicate_domains;
  FuzzConfig fuzz;
  std::uint64_t seed = 0;

  std::string predicates_path;
  std::string entities_path;
  std::string pos_lexicon_path;  // optional

  std::map<QuestionType, double> type_weights;  // empty: uniform over types present
  TypingOptions typing;
  WhTable wh = default_wh_table();
  unsigned threads = 1;

  // Throws ConfigError; checks referenced files exist.
  void validate() const;
};

// Relative paths resolve against the recipe file's directory.
SplitRecipe parse_recipe(const ConfigDoc& doc, const std::string& base_dir);
SplitRecipe load_recipe(const std::string& path);

KnowledgeSlice load_slice(const SplitRecipe& recipe);

class PartialOutputError : public Error {
 public:
  PartialOutputError(std::size_t achieved, std::size_t target, std::size_t attempts)
      : Error("generated only " + std::to_string(achieved) + " of " + std::to_string(target) +
              " distinct pairs in " + std::to_string(attempts) + " attempts"),
        achieved_(achieved) {}
  std::size_t achieved() const { return achieved_; }

 private:
  std::size_t achieved_;
};

struct GenerationReport {
  std::size_t emitted = 0;
  std::size_t attempts = 0;
  std::size_t dead_ends = 0;
  std::size_t duplicates = 0;
};

// Everything a split needs, derived once from the recipe and slice.
class SplitGenerator {
 public:
  SplitGenerator(SplitRecipe recipe, const KnowledgeSlice& slice);
  SplitGenerator(const SplitGenerator&) = delete;
  SplitGenerator& operator=(const SplitGenerator&) = delete;

  const SplitRecipe& recipe() const { return recipe_; }
  const KnowledgeSlice& slice() const { return *slice_; }
  const TypeGraph& graph() const { return graph_; }
  const std::vector<NumberedTemplate>& templates() const { return templates_; }
  const std::vector<std::string>& start_types() const { return start_types_; }

  // One candidate pair for item `index`; nullopt when typing hit a dead end.
  // Pure function of (recipe, slice, index).
  std::optional<QAPair> make_item(std::uint64_t index, TypedTemplate* typed_out = nullptr) const;

  // Emits exactly target_count distinct pairs in item order. Throws
  // PartialOutputError after 10 x target_count attempts.
  GenerationReport run(const std::function<void(const QAPair&)>& sink,
                       const std::function<void(const TypedTemplate&)>& typed_sink = {}) const;

 private:
  SplitRecipe recipe_;
  std::unique_ptr<KnowledgeSlice> slice_;
  TypeGraph graph_;
  std::unique_ptr<SliceIndex> index_;
  std::vector<NumberedTemplate> templates_;
  std::map<QuestionType, std::vector<std::size_t>> by_type_;
  std::vector<QuestionType> types_;
  std::vector<double> cumulative_weights_;
  std::vector<std::string> start_types_;
};

std::vector<QAPair> generate_split(const SplitRecipe& recipe, const KnowledgeSlice& slice,
                                   GenerationReport* report = nullptr);

enum class CorpusFormat { Jsonl, Tsv };

std::optional<CorpusFormat> parse_corpus_format(std::string_view text);

nlohmann::ordered_json to_json(const QAPair& pair);
QAPair pair_from_json(const nlohmann::json& j);

class CorpusWriter {
 public:
  CorpusWriter(std::ostream& out, CorpusFormat format) : out_(&out), format_(format) {}
  void write(const QAPair& pair);

 private:
  std::ostream* out_;
  CorpusFormat format_;
};

void write_corpus(const std::vector<QAPair>& pairs, const std::string& path, CorpusFormat format);
std::vector<QAPair> read_corpus(const std::string& path);

struct CorpusStats {
  std::size_t pairs = 0;
  std::map<QuestionType, std::size_t> per_type;
  std::size_t unique_predicates = 0;
  std::size_t unique_entities = 0;
  std::size_t predicate_labels = 0;  // distinct labels summed over used predicates
  std::size_t entity_labels = 0;
  std::size_t unique_entity_label_strings = 0;
  double mean_predicate_labels = 0;
  double mean_predicate_aliases = 0;  // primary label excluded
  double mean_entity_labels = 0;
  double mean_entity_aliases = 0;
  std::map<int, std::size_t> depth_histogram;
};

CorpusStats compute_stats(const std::vector<QAPair>& corpus, const KnowledgeSlice& slice);
CorpusStats compute_stats(const std::string& corpus_path, const KnowledgeSlice& slice);

std::string format_stats(const CorpusStats& stats);
nlohmann::ordered_json to_json(const CorpusStats& stats);

}  // namespace squit
