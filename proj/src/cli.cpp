#include "squit/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "squit/eval.hpp"
#include "squit/fuzz.hpp"
#include "squit/grammar.hpp"
#include "squit/kb.hpp"
#include "squit/pipeline.hpp"
#include "squit/template_gen.hpp"

namespace squit {

namespace fs = std::filesystem;

namespace {

// Writes to "<path>.tmp" and renames on commit.
class OutputFile {
 public:
  explicit OutputFile(std::string path) : path_(std::move(path)), tmp_(path_ + ".tmp") {
    stream_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw IoError(path_, "cannot open for writing");
  }
  ~OutputFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  std::ostream& stream() { return stream_; }
  void commit() {
    stream_.flush();
    if (!stream_) throw IoError(path_, "write failed");
    stream_.close();
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw IoError(path_, ec.message());
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config;
  std::string out;
  std::string format = "jsonl";
};

KnowledgeSlice slice_from_files(const std::string& predicates, const std::string& entities,
                                const std::string& lexicon_path) {
  PosLexicon lexicon;
  if (!lexicon_path.empty()) lexicon = load_pos_lexicon(lexicon_path);
  std::vector<PredicateRecord> preds;
  std::vector<EntityRecord> ents;
  if (!predicates.empty()) preds = load_predicates(predicates, lexicon_path.empty() ? nullptr : &lexicon);
  if (!entities.empty()) ents = load_entities(entities);
  return make_slice(std::move(preds), std::move(ents));
}

std::string format_summary(std::string_view what, const LabelSummary& s) {
  return fmt::format("{}: {} records, {} ids, {} labels, mean labels {:.2f}, mean aliases {:.2f}\n",
                     what, s.records, s.unique_ids, s.labels, s.mean_labels, s.mean_aliases);
}

struct IngestArgs {
  std::string endpoint;
  std::vector<std::string> domains;
  std::size_t limit = 1000;
  std::string cache_dir;
  int timeout = 60;
  std::string predicates;
  std::string entities;
  std::string lexicon;
};

int cmd_ingest(const Globals& g, const IngestArgs& a, std::ostream& out, std::ostream& err) {
  std::string endpoint = a.endpoint;
  if (endpoint.empty()) {
    if (const char* env = std::getenv("SQUIT_ENDPOINT")) endpoint = env;
  }
  const bool local = !a.predicates.empty() || !a.entities.empty();
  if (!local && endpoint.empty()) {
    err << "ingest: pass --predicates/--entities, or --endpoint (or set SQUIT_ENDPOINT)\n";
    return 1;
  }
  if (!local && a.domains.empty()) {
    err << "ingest: --domain is required when fetching from an endpoint\n";
    return 1;
  }

  KnowledgeSlice slice = slice_from_files(a.predicates, a.entities, a.lexicon);
  if (!local) {
    std::vector<EntityRecord> entities;
    for (const auto& domain : a.domains) {
      FetchOptions options;
      options.timeout_seconds = a.timeout;
      if (!a.cache_dir.empty())
        options.cache_path = (fs::path(a.cache_dir) / (domain + ".jsonl")).string();
      err << fmt::format("fetching up to {} entities of type {} from {}\n", a.limit, domain, endpoint);
      auto fetched = fetch_slice(endpoint, domain, a.limit, options);
      entities.insert(entities.end(), fetched.entities.begin(), fetched.entities.end());
    }
    slice = make_slice({}, std::move(entities));
  }

  if (!g.out.empty()) {
    fs::create_directories(g.out);
    if (!slice.predicates.empty())
      write_predicates(slice.predicates, (fs::path(g.out) / "predicates.jsonl").string());
    if (!slice.entities.empty())
      write_entities(slice.entities, (fs::path(g.out) / "entities.jsonl").string());
  }
  if (!slice.predicates.empty()) out << format_summary("predicates", summarize_predicates(slice.predicates));
  if (!slice.entities.empty()) out << format_summary("entities", summarize_entities(slice.entities));
  return 0;
}

struct GenerateArgs {
  std::optional<std::size_t> target;
  std::optional<unsigned> threads;
  std::string dump_graph;
  std::string dump_typed;
};

int cmd_generate(const Globals& g, const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  if (g.config.empty()) {
    err << "generate: --config is required (path to a split recipe)\n";
    return 1;
  }
  SplitRecipe recipe = load_recipe(g.config);
  if (g.seed_given) recipe.seed = g.seed;
  if (a.target) recipe.target_count = *a.target;
  if (a.threads) recipe.threads = *a.threads;
  recipe.validate();
  const auto format = *parse_corpus_format(g.format);

  KnowledgeSlice slice = load_slice(recipe);
  SplitGenerator generator(recipe, slice);
  err << fmt::format("{}: {} templates, {} graph nodes, {} signatures\n", recipe.name,
                     generator.templates().size(), generator.graph().nodes().size(),
                     generator.graph().edges().size());

  if (!a.dump_graph.empty()) {
    OutputFile dot(a.dump_graph);
    dot.stream() << generator.graph().to_dot();
    dot.commit();
  }

  std::optional<OutputFile> file;
  if (!g.out.empty()) file.emplace(g.out);
  std::optional<OutputFile> typed_file;
  if (!a.dump_typed.empty()) typed_file.emplace(a.dump_typed);

  CorpusWriter writer(file ? file->stream() : out, format);
  std::function<void(const TypedTemplate&)> typed_sink;
  if (typed_file) {
    typed_sink = [&](const TypedTemplate& t) { typed_file->stream() << to_json(t).dump() << '\n'; };
  }

  GenerationReport report;
  try {
    report = generator.run([&](const QAPair& p) { writer.write(p); }, typed_sink);
  } catch (const PartialOutputError& e) {
    if (file) file->commit();
    if (typed_file) typed_file->commit();
    throw;
  }
  if (file) file->commit();
  if (typed_file) typed_file->commit();
  err << fmt::format("{}: wrote {} pairs in {} attempts ({} dead ends, {} duplicates)\n", recipe.name,
                     report.emitted, report.attempts, report.dead_ends, report.duplicates);
  return 0;
}

struct FuzzArgs {
  std::string input;
  std::optional<double> filler_prob;
  std::optional<double> case_prob;
  std::optional<double> char_noise_prob;
  bool hard = false;
};

int cmd_fuzz(const Globals& g, const FuzzArgs& a, std::ostream& out, std::ostream& err) {
  FuzzConfig config;
  if (a.hard) config = FuzzConfig::test_hard_defaults();
  if (!g.config.empty()) {
    auto doc = ConfigDoc::load(g.config);
    config = parse_recipe(doc, fs::path(g.config).parent_path().string()).fuzz;
  }
  if (a.filler_prob) config.filler_prob = *a.filler_prob;
  if (a.case_prob) config.case_prob = *a.case_prob;
  if (a.char_noise_prob) config.char_noise_prob = *a.char_noise_prob;
  config.validate();
  const auto format = *parse_corpus_format(g.format);

  auto pairs = read_corpus(a.input);
  std::optional<OutputFile> file;
  if (!g.out.empty()) file.emplace(g.out);
  CorpusWriter writer(file ? file->stream() : out, format);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& p = pairs[i];
    p.entity_spans = locate_entity_spans(p.question, p.query);
    const std::string before = p.question;
    Rng rng = Rng::derive(g.seed, i, config.salt);
    fuzz_pair(p, config, rng);
    if (p.question != before) ++changed;
    writer.write(p);
  }
  if (file) file->commit();
  err << fmt::format("fuzzed {} of {} questions\n", changed, pairs.size());
  return 0;
}

struct EvalArgs {
  std::string pred;
  std::string gold;
  bool no_normalize = false;
  bool smoothing = false;
  double rouge_w_exp = 1.2;
  std::string dataset = "corpus";
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  ScoreOptions options;
  options.normalize = !a.no_normalize;
  options.bleu.smoothing = a.smoothing;
  options.rouge_w_exponent = a.rouge_w_exp;
  auto report = score_corpus(a.pred, a.gold, options);
  out << format_report(report, a.dataset);
  out << to_json(report).dump() << '\n';
  return 0;
}

struct StatsArgs {
  std::string corpus;
  std::string predicates;
  std::string entities;
  bool json = false;
};

int cmd_stats(const Globals& g, const StatsArgs& a, std::ostream& out, std::ostream& err) {
  KnowledgeSlice slice;
  if (!a.predicates.empty() || !a.entities.empty()) {
    slice = slice_from_files(a.predicates, a.entities, "");
  } else if (!g.config.empty()) {
    slice = load_slice(load_recipe(g.config));
  } else {
    err << "stats: pass --config or --predicates/--entities to name the slice\n";
    return 1;
  }
  auto stats = compute_stats(a.corpus, slice);
  if (a.json) out << to_json(stats).dump(2) << '\n';
  else out << format_stats(stats);
  return 0;
}

struct TemplatesArgs {
  std::vector<std::string> grammars;
  int max_depth = 5;
  bool numbered = false;
};

int cmd_templates(const TemplatesArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<BaselineTemplate> all;
  for (const auto& path : a.grammars) {
    auto grammar = load_grammar(path);
    for (const auto& w : grammar.warnings) err << path << ": warning: " << w << '\n';
    auto templates = enumerate_templates(grammar, a.max_depth);
    for (const auto& t : templates) {
      if (auto problem = check_template(t)) throw ValidationError(t.id + ": " + *problem);
      const std::string text = a.numbered ? number_predicates(t).text() : t.text();
      out << fmt::format("{}\t{}\t{}\n", t.id, t.depth, text);
    }
    all.insert(all.end(), templates.begin(), templates.end());
  }
  err << format_template_stats(template_stats(all));
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic question/SPARQL dataset generator"};
  app.name("squit");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed (overrides the recipe)");
  app.add_option("--config", g.config, "Split recipe file");
  app.add_option("--out", g.out, "Output file (ingest: output directory)");
  app.add_option("--format", g.format, "Corpus format")->check(CLI::IsMember({"jsonl", "tsv"}));

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Clean knowledge-base dumps or fetch entities");
  ingest_cmd->add_option("--endpoint", ingest.endpoint, "SPARQL endpoint (default $SQUIT_ENDPOINT)");
  ingest_cmd->add_option("--domain", ingest.domains, "Entity type to fetch (repeatable)");
  ingest_cmd->add_option("--limit", ingest.limit, "Entities per domain")->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--cache", ingest.cache_dir, "Directory for per-domain result caches");
  ingest_cmd->add_option("--timeout", ingest.timeout, "Request timeout in seconds");
  ingest_cmd->add_option("--predicates", ingest.predicates, "Raw predicate dump");
  ingest_cmd->add_option("--entities", ingest.entities, "Raw entity dump");
  ingest_cmd->add_option("--pos-lexicon", ingest.lexicon, "label<TAB>POS overrides");

  GenerateArgs generate;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a split from a recipe");
  generate_cmd->add_option("--target", generate.target, "Override target_count");
  generate_cmd->add_option("--threads", generate.threads, "Worker threads");
  generate_cmd->add_option("--dump-graph", generate.dump_graph, "Write the type graph as DOT");
  generate_cmd->add_option("--dump-typed", generate.dump_typed, "Write typed templates as JSON lines");

  FuzzArgs fuzz;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Apply question noise to a JSONL corpus");
  fuzz_cmd->add_option("--in", fuzz.input, "Input corpus (JSONL)")->required();
  fuzz_cmd->add_option("--filler-prob", fuzz.filler_prob);
  fuzz_cmd->add_option("--case-prob", fuzz.case_prob);
  fuzz_cmd->add_option("--char-noise-prob", fuzz.char_noise_prob);
  fuzz_cmd->add_flag("--hard", fuzz.hard, "Start from the test-hard noise levels");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted queries against gold queries");
  eval_cmd->add_option("--pred", eval.pred, "Predictions, one query per line")->required();
  eval_cmd->add_option("--gold", eval.gold, "Gold queries, one per line")->required();
  eval_cmd->add_flag("--no-normalize", eval.no_normalize);
  eval_cmd->add_flag("--bleu-smoothing", eval.smoothing);
  eval_cmd->add_option("--rouge-w-exp", eval.rouge_w_exp);
  eval_cmd->add_option("--dataset", eval.dataset, "Row label in the report");

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  stats_cmd->add_option("--corpus", stats.corpus, "Corpus (JSONL)")->required();
  stats_cmd->add_option("--predicates", stats.predicates, "Predicate dump of the slice");
  stats_cmd->add_option("--entities", stats.entities, "Entity dump of the slice");
  stats_cmd->add_flag("--json", stats.json);

  TemplatesArgs templates;
  auto* templates_cmd = app.add_subcommand("templates", "List baseline templates of grammars");
  templates_cmd->add_option("--grammar", templates.grammars, "Grammar file (repeatable)")->required();
  templates_cmd->add_option("--max-depth", templates.max_depth);
  templates_cmd->add_flag("--numbered", templates.numbered, "Show numbered predicate slots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*ingest_cmd) return cmd_ingest(g, ingest, out, err);
    if (*generate_cmd) return cmd_generate(g, generate, out, err);
    if (*fuzz_cmd) return cmd_fuzz(g, fuzz, out, err);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*stats_cmd) return cmd_stats(g, stats, out, err);
    if (*templates_cmd) return cmd_templates(templates, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace squit
