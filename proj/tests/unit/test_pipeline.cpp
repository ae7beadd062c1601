#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "squit/error.hpp"
#include "squit/eval.hpp"
#include "squit/pipeline.hpp"

using namespace squit;
namespace fs = std::filesystem;

namespace {

const std::string kRoot = SQUIT_SOURCE_DIR;

SplitRecipe small_recipe(std::size_t target, std::uint64_t seed = 5) {
  SplitRecipe r;
  r.name = "unit";
  r.target_count = target;
  r.seed = seed;
  r.max_depth = 5;
  r.grammars = {kRoot + "/grammars/single_entity.cfg", kRoot + "/grammars/multi_entity.cfg",
                kRoot + "/grammars/count.cfg"};
  r.predicates_path = kRoot + "/data/predicates.jsonl";
  r.entities_path = kRoot + "/data/entities.jsonl";
  r.pos_lexicon_path = kRoot + "/data/pos_lexicon.tsv";
  r.predicate_domains = {"person", "film", "literary work", "television series"};
  r.entity_domains = {"person", "film", "literary work", "television series", "chemical compound"};
  return r;
}

const KnowledgeSlice& data_slice() {
  static const KnowledgeSlice slice = load_slice(small_recipe(1));
  return slice;
}

std::string jsonl(const std::vector<QAPair>& pairs) {
  std::ostringstream out;
  CorpusWriter w(out, CorpusFormat::Jsonl);
  for (const auto& p : pairs) w.write(p);
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

KnowledgeSlice stats_slice() {
  return make_slice(
      {
          {"P1", {"a", "b"}, Pos::Noun, "film", "person"},
          {"P2", {"c", "d"}, Pos::Noun, "person", "person"},
          {"P3", {"e", "f", "g"}, Pos::Noun, "person", "award"},
          {"P4", {"h"}, Pos::Noun, "film", "genre"},
      },
      {{"Q1", {"X", "Ex"}, "film"}, {"Q2", {"Y"}, "person"}});
}

}  // namespace

TEST(Pipeline, TargetOneGivesOnePair) {
  auto pairs = generate_split(small_recipe(1), data_slice());
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].split_tag, "unit");
}

TEST(Pipeline, DeterministicAndThreadIndependent) {
  auto r = small_recipe(600, 11);
  auto a = jsonl(generate_split(r, data_slice()));
  auto b = jsonl(generate_split(r, data_slice()));
  r.threads = 3;
  auto c = jsonl(generate_split(r, data_slice()));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  auto other = small_recipe(600, 12);
  EXPECT_NE(a, jsonl(generate_split(other, data_slice())));
}

TEST(Pipeline, NoDuplicatesAndAllValid) {
  GenerationReport report;
  auto pairs = generate_split(small_recipe(1500, 3), data_slice(), &report);
  ASSERT_EQ(pairs.size(), 1500u);
  EXPECT_EQ(report.emitted, 1500u);
  EXPECT_EQ(report.attempts, report.emitted + report.dead_ends + report.duplicates);
  SplitGenerator gen(small_recipe(1), data_slice());
  std::set<std::pair<std::string, std::string>> seen;
  std::map<QuestionType, int> per_type;
  for (const auto& p : pairs) {
    EXPECT_TRUE(seen.emplace(p.question, p.query).second) << p.question;
    EXPECT_TRUE(validate_sparql_subset(p.query).ok) << p.query;
    for (std::size_t c = 0; c < p.predicate_ids.size(); ++c)
      EXPECT_TRUE(validate_chain(gen.graph(), p.start_types[c], p.predicate_ids[c])) << p.query;
    ++per_type[p.question_type];
  }
  for (auto type : {QuestionType::SingleEntity, QuestionType::MultiEntity, QuestionType::Count})
    EXPECT_NEAR(per_type[type], 500, 120) << to_string(type);
}

TEST(Pipeline, TypeWeightsSteerMix) {
  auto r = small_recipe(300);
  r.type_weights = {{QuestionType::Count, 1.0}};
  for (const auto& p : generate_split(r, data_slice())) EXPECT_EQ(p.question_type, QuestionType::Count);
}

TEST(Pipeline, MissingDomainIsConfigError) {
  auto r = small_recipe(10);
  r.entity_domains.push_back("planet");
  try {
    SplitGenerator gen(r, data_slice());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("planet"), std::string::npos);
  }
  r = small_recipe(10);
  r.predicate_domains.push_back("chemical compound");
  EXPECT_THROW(SplitGenerator(r, data_slice()), ConfigError);
}

TEST(Pipeline, ExhaustionIsPartialOutput) {
  auto slice = make_slice({{"P1", {"mother"}, Pos::Noun, "person", "person"}},
                          {{"Q1", {"Ann"}, "person"}});
  SplitRecipe r = small_recipe(1000);
  r.grammars = {kRoot + "/grammars/single_entity.cfg"};
  r.max_depth = 3;
  r.predicate_domains = {"person"};
  r.entity_domains = {"person"};
  try {
    generate_split(r, slice);
    FAIL();
  } catch (const PartialOutputError& e) {
    EXPECT_GT(e.achieved(), 0u);
    EXPECT_LT(e.achieved(), 1000u);
  }
}

TEST(Pipeline, FuzzedSplitKeepsEntityLabels) {
  auto r = small_recipe(400);
  r.entity_domains = {"chemical compound"};
  r.fuzz = FuzzConfig::test_hard_defaults();
  for (const auto& p : generate_split(r, data_slice())) {
    for (std::size_t i = 0; i < p.entity_spans.size(); ++i)
      EXPECT_EQ(p.question.substr(p.entity_spans[i].begin, p.entity_spans[i].length),
                p.entity_labels[i]);
    EXPECT_TRUE(validate_sparql_subset(p.query).ok);
  }
}

TEST(Corpus, JsonlFieldOrderAndRoundTrip) {
  QAPair p;
  p.question = "Who is the mother of the director of Pulp Fiction?";
  p.query = "SELECT ?end WHERE { [ Pulp Fiction ] wdt:P5 / wdt:P25 ?end . }";
  p.question_type = QuestionType::SingleEntity;
  p.template_id = "single_entity#7";
  p.depth = 5;
  p.entity_ids = {"Q104"};
  p.predicate_ids = {{"P5", "P25"}};
  const std::string line = jsonl({p});
  EXPECT_EQ(line,
            R"({"question":"Who is the mother of the director of Pulp Fiction?","query":"SELECT ?end WHERE { [ Pulp Fiction ] wdt:P5 / wdt:P25 ?end . }","type":"SingleEntity","template_id":"single_entity#7","depth":5,"entity_ids":["Q104"],"predicate_ids":[["P5","P25"]]})"
            "\n");

  auto pairs = generate_split(small_recipe(200), data_slice());
  auto path = fs::temp_directory_path() / "squit_rt.jsonl";
  write_corpus(pairs, path.string(), CorpusFormat::Jsonl);
  auto back = read_corpus(path.string());
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].question, pairs[i].question);
    EXPECT_EQ(back[i].query, pairs[i].query);
    EXPECT_EQ(back[i].question_type, pairs[i].question_type);
    EXPECT_EQ(back[i].template_id, pairs[i].template_id);
    EXPECT_EQ(back[i].depth, pairs[i].depth);
    EXPECT_EQ(back[i].entity_ids, pairs[i].entity_ids);
    EXPECT_EQ(back[i].predicate_ids, pairs[i].predicate_ids);
  }
  EXPECT_EQ(jsonl(back), slurp(path));
}

TEST(Corpus, TsvAndEmpty) {
  QAPair p;
  p.question = "What was 2,4-MCPA?";
  p.query = "SELECT ?end WHERE { BIND ( [ 2,4-MCPA ] as ?end ) . }";
  auto path = fs::temp_directory_path() / "squit_one.tsv";
  write_corpus({p}, path.string(), CorpusFormat::Tsv);
  EXPECT_EQ(slurp(path), p.question + "\t" + p.query + "\n");

  auto empty = fs::temp_directory_path() / "squit_empty.jsonl";
  write_corpus({}, empty.string(), CorpusFormat::Jsonl);
  EXPECT_TRUE(fs::exists(empty));
  EXPECT_EQ(fs::file_size(empty), 0u);
  EXPECT_TRUE(read_corpus(empty.string()).empty());

  EXPECT_THROW(write_corpus({p}, "/nonexistent/dir/out.jsonl", CorpusFormat::Jsonl), IoError);
  EXPECT_EQ(parse_corpus_format("tsv"), CorpusFormat::Tsv);
  EXPECT_FALSE(parse_corpus_format("csv"));
}

TEST(Corpus, BadRecordReportsLine) {
  auto path = fs::temp_directory_path() / "squit_bad.jsonl";
  std::ofstream(path) << R"({"question":"q","query":"x","type":"Count","template_id":"t","depth":1,"entity_ids":[],"predicate_ids":[]})"
                      << "\n{\"question\": 3}\n";
  try {
    read_corpus(path.string());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Stats, MeanLabelsTwo) {
  QAPair a;
  a.question_type = QuestionType::SingleEntity;
  a.depth = 4;
  a.entity_ids = {"Q1"};
  a.predicate_ids = {{"P1", "P2"}};
  QAPair b;
  b.question_type = QuestionType::Count;
  b.depth = 5;
  b.entity_ids = {"Q2"};
  b.predicate_ids = {{"P3"}};
  QAPair c;
  c.question_type = QuestionType::Count;
  c.depth = 5;
  c.entity_ids = {"Q1"};
  c.predicate_ids = {{"P4"}};
  auto s = compute_stats({a, b, c}, stats_slice());
  EXPECT_EQ(s.pairs, 3u);
  EXPECT_EQ(s.unique_predicates, 4u);
  EXPECT_EQ(s.predicate_labels, 8u);
  EXPECT_DOUBLE_EQ(s.mean_predicate_labels, 2.0);
  EXPECT_DOUBLE_EQ(s.mean_predicate_aliases, 1.0);
  EXPECT_EQ(s.unique_entities, 2u);
  EXPECT_DOUBLE_EQ(s.mean_entity_labels, 1.5);
  EXPECT_EQ(s.per_type[QuestionType::Count], 2u);
  EXPECT_EQ(s.depth_histogram[5], 2u);
  const auto text = format_stats(s);
  EXPECT_NE(text.find("mean labels per predicate: 2.00"), std::string::npos) << text;
  EXPECT_NE(text.find("1.50"), std::string::npos) << text;
  EXPECT_EQ(to_json(s)["mean_predicate_labels"], "2.00");
}

TEST(Stats, UnknownIdIsIntegrityError) {
  QAPair a;
  a.entity_ids = {"Q1"};
  a.predicate_ids = {{"P404"}};
  try {
    compute_stats({a}, stats_slice());
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("P404"), std::string::npos);
  }
  a.predicate_ids = {{"P1"}};
  a.entity_ids = {"Q404"};
  EXPECT_THROW(compute_stats({a}, stats_slice()), IntegrityError);
}

TEST(Stats, RecomputableFromFile) {
  auto pairs = generate_split(small_recipe(300), data_slice());
  auto path = fs::temp_directory_path() / "squit_stats.jsonl";
  write_corpus(pairs, path.string(), CorpusFormat::Jsonl);
  auto from_memory = compute_stats(pairs, data_slice());
  auto from_file = compute_stats(path.string(), data_slice());
  EXPECT_EQ(to_json(from_memory), to_json(from_file));
  EXPECT_EQ(format_stats(from_memory), format_stats(from_file));
}
