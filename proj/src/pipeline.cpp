#include "squit/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "squit/config.hpp"

namespace squit {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBatchPerThread = 512;

const std::set<std::string> kRecipeKeys = {
    "name",     "target_count",      "seed",     "grammars",   "max_depth",
    "entity_domains", "predicate_domains", "predicates", "entities", "pos_lexicon",
    "threads",  "step_policy",       "retries",  "meet_attempts", "meet_resamples"};
const std::set<std::string> kFuzzKeys = {"filler_prob", "filler_list", "case_prob",
                                         "char_noise_prob", "salt"};

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string dedup_key(const QAPair& p) { return p.question + '\0' + p.query; }

}  // namespace

void SplitRecipe::validate() const {
  if (target_count < 1) throw ConfigError("recipe " + name + ": target_count must be at least 1");
  if (max_depth < 1) throw ConfigError("recipe " + name + ": max_depth must be at least 1");
  if (grammars.empty()) throw ConfigError("recipe " + name + ": no grammars listed");
  if (entity_domains.empty()) throw ConfigError("recipe " + name + ": entity_domains is empty");
  if (predicate_domains.empty())
    throw ConfigError("recipe " + name + ": predicate_domains is empty");
  fuzz.validate();
  for (const auto& [type, w] : type_weights)
    if (w < 0) throw ConfigError("recipe " + name + ": negative type weight");
  std::vector<std::string> files = grammars;
  files.push_back(predicates_path);
  files.push_back(entities_path);
  if (!pos_lexicon_path.empty()) files.push_back(pos_lexicon_path);
  for (const auto& f : files) {
    if (f.empty()) throw ConfigError("recipe " + name + ": predicates and entities are required");
    if (!fs::exists(f)) throw ConfigError("recipe " + name + ": file not found: " + f);
  }
}

SplitRecipe parse_recipe(const ConfigDoc& doc, const std::string& base_dir) {
  for (const auto& [key, value] : doc.values()) {
    auto dot = key.find('.');
    if (dot == std::string::npos) {
      if (!kRecipeKeys.contains(key)) throw ConfigError("unknown recipe key '" + key + "'");
      continue;
    }
    const std::string section = key.substr(0, dot);
    if (section == "fuzz" && !kFuzzKeys.contains(key.substr(dot + 1)))
      throw ConfigError("unknown fuzz key '" + key.substr(dot + 1) + "'");
    if (section != "fuzz" && section != "wh" && section != "type_weights")
      throw ConfigError("unknown recipe section [" + section + "]");
  }

  SplitRecipe r;
  r.name = doc.get_string("name").value_or("split");
  if (auto n = doc.get_int("target_count")) {
    if (*n < 1) throw ConfigError("target_count must be at least 1");
    r.target_count = static_cast<std::size_t>(*n);
  }
  if (auto s = doc.get_int("seed")) r.seed = static_cast<std::uint64_t>(*s);
  if (auto d = doc.get_int("max_depth")) r.max_depth = static_cast<int>(*d);
  for (const auto& g : doc.get_strings("grammars").value_or(std::vector<std::string>{}))
    r.grammars.push_back(resolve(base_dir, g));
  r.entity_domains = doc.get_strings("entity_domains").value_or(std::vector<std::string>{});
  r.predicate_domains = doc.get_strings("predicate_domains").value_or(std::vector<std::string>{});
  r.predicates_path = resolve(base_dir, doc.get_string("predicates").value_or(""));
  r.entities_path = resolve(base_dir, doc.get_string("entities").value_or(""));
  r.pos_lexicon_path = resolve(base_dir, doc.get_string("pos_lexicon").value_or(""));
  if (auto t = doc.get_int("threads")) r.threads = static_cast<unsigned>(std::max<std::int64_t>(1, *t));
  if (auto retries = doc.get_int("retries")) r.typing.retries = static_cast<int>(*retries);
  if (auto m = doc.get_int("meet_attempts"))
    r.typing.bidirectional.attempts_per_first_path = static_cast<int>(*m);
  if (auto m = doc.get_int("meet_resamples"))
    r.typing.bidirectional.first_path_resamples = static_cast<int>(*m);
  if (auto policy = doc.get_string("step_policy")) {
    if (*policy == "edge-uniform") r.typing.policy = StepPolicy::EdgeUniform;
    else if (*policy == "predicate-uniform") r.typing.policy = StepPolicy::PredicateUniform;
    else throw ConfigError("step_policy must be edge-uniform or predicate-uniform");
    r.typing.bidirectional.policy = r.typing.policy;
  }

  if (auto p = doc.get_double("fuzz.filler_prob")) r.fuzz.filler_prob = *p;
  if (auto l = doc.get_strings("fuzz.filler_list")) r.fuzz.filler_list = *l;
  if (auto p = doc.get_double("fuzz.case_prob")) r.fuzz.case_prob = *p;
  if (auto p = doc.get_double("fuzz.char_noise_prob")) r.fuzz.char_noise_prob = *p;
  if (auto s = doc.get_int("fuzz.salt")) r.fuzz.salt = static_cast<std::uint64_t>(*s);

  for (const auto& key : doc.keys_in("type_weights")) {
    auto type = parse_question_type(key);
    if (!type) throw ConfigError("unknown question type in [type_weights]: " + key);
    r.type_weights[*type] = *doc.get_double("type_weights." + key);
  }
  for (const auto& key : doc.keys_in("wh")) r.wh[key] = *doc.get_string("wh." + key);
  return r;
}

SplitRecipe load_recipe(const std::string& path) {
  auto doc = ConfigDoc::load(path);
  auto recipe = parse_recipe(doc, fs::path(path).parent_path().string());
  recipe.validate();
  return recipe;
}

KnowledgeSlice load_slice(const SplitRecipe& recipe) {
  PosLexicon lexicon;
  if (!recipe.pos_lexicon_path.empty()) lexicon = load_pos_lexicon(recipe.pos_lexicon_path);
  return make_slice(load_predicates(recipe.predicates_path,
                                    recipe.pos_lexicon_path.empty() ? nullptr : &lexicon),
                    load_entities(recipe.entities_path));
}

SplitGenerator::SplitGenerator(SplitRecipe recipe, const KnowledgeSlice& slice)
    : recipe_(std::move(recipe)), slice_(std::make_unique<KnowledgeSlice>()) {
  for (const auto& p : slice.predicates)
    if (contains(recipe_.predicate_domains, p.domain_type) && p.pos != Pos::Other)
      slice_->predicates.push_back(p);
  for (const auto& e : slice.entities)
    if (contains(recipe_.entity_domains, e.entity_type)) slice_->entities.push_back(e);

  for (const auto& d : recipe_.entity_domains) {
    bool found = std::any_of(slice_->entities.begin(), slice_->entities.end(),
                             [&](const EntityRecord& e) { return e.entity_type == d; });
    if (!found) throw ConfigError("slice has no entities of domain '" + d + "'");
  }
  for (const auto& d : recipe_.predicate_domains) {
    bool found = std::any_of(slice_->predicates.begin(), slice_->predicates.end(),
                             [&](const PredicateRecord& p) { return p.domain_type == d; });
    if (!found) throw ConfigError("slice has no predicates for domain '" + d + "'");
  }
  *slice_ = make_slice(std::move(slice_->predicates), std::move(slice_->entities));

  graph_ = build_graph(slice_->predicates);
  std::set<std::string> stand_ins;
  for (const auto& d : recipe_.entity_domains)
    if (!contains(recipe_.predicate_domains, d)) stand_ins.insert(d);
  index_ = std::make_unique<SliceIndex>(*slice_, std::move(stand_ins));
  start_types_ = recipe_.predicate_domains;

  for (const auto& path : recipe_.grammars) {
    const auto grammar = load_grammar(path);
    for (const auto& t : enumerate_templates(grammar, recipe_.max_depth)) {
      if (auto problem = check_template(t)) throw ValidationError(path + ": " + *problem);
      templates_.push_back(number_predicates(t));
    }
  }
  if (templates_.empty()) throw ConfigError("recipe " + recipe_.name + " yields no templates");
  for (std::size_t i = 0; i < templates_.size(); ++i)
    by_type_[templates_[i].base.question_type].push_back(i);

  double total = 0;
  for (const auto& [type, ids] : by_type_) {
    double w = 1.0;
    if (!recipe_.type_weights.empty()) {
      auto it = recipe_.type_weights.find(type);
      w = it == recipe_.type_weights.end() ? 0.0 : it->second;
    }
    if (w <= 0) continue;
    total += w;
    types_.push_back(type);
    cumulative_weights_.push_back(total);
  }
  if (types_.empty()) throw ConfigError("recipe " + recipe_.name + ": all type weights are zero");
}

std::optional<QAPair> SplitGenerator::make_item(std::uint64_t index, TypedTemplate* typed_out) const {
  Rng rng = Rng::derive(recipe_.seed, index);
  const double draw = rng.unit() * cumulative_weights_.back();
  std::size_t t = 0;
  while (t + 1 < types_.size() && draw >= cumulative_weights_[t]) ++t;
  const auto& ids = by_type_.at(types_[t]);
  const auto& numbered = templates_[ids[rng.uniform(ids.size())]];

  TypedTemplate typed;
  try {
    typed = assign_types(numbered, graph_, start_types_, rng, recipe_.typing);
  } catch (const DeadEndError&) {
    return std::nullopt;
  }
  QAPair pair = generate_pair(typed, *index_, rng, recipe_.wh);
  pair.split_tag = recipe_.name;
  if (!recipe_.fuzz.is_identity()) {
    Rng fuzz_rng = Rng::derive(recipe_.seed, index, recipe_.fuzz.salt);
    fuzz_pair(pair, recipe_.fuzz, fuzz_rng);
  }
  if (typed_out) *typed_out = std::move(typed);
  return pair;
}

GenerationReport SplitGenerator::run(const std::function<void(const QAPair&)>& sink,
                                     const std::function<void(const TypedTemplate&)>& typed_sink) const {
  GenerationReport report;
  const std::size_t target = recipe_.target_count;
  const std::uint64_t max_attempts = 10 * static_cast<std::uint64_t>(target);
  const unsigned threads = std::max(1u, recipe_.threads);
  const std::size_t batch_size = kBatchPerThread * threads;
  std::unordered_set<std::string> seen;
  seen.reserve(target * 2);

  std::uint64_t next = 0;
  while (report.emitted < target && next < max_attempts) {
    const auto batch = static_cast<std::size_t>(std::min<std::uint64_t>(batch_size, max_attempts - next));
    std::vector<std::optional<QAPair>> results(batch);
    std::vector<TypedTemplate> typed(typed_sink ? batch : 0);

    auto work = [&](unsigned worker, std::exception_ptr& error) {
      try {
        for (std::size_t k = worker; k < batch; k += threads)
          results[k] = make_item(next + k, typed_sink ? &typed[k] : nullptr);
      } catch (...) {
        error = std::current_exception();
      }
    };
    std::vector<std::exception_ptr> errors(threads);
    if (threads == 1) {
      work(0, errors[0]);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, std::ref(errors[w]));
      for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    for (std::size_t k = 0; k < batch && report.emitted < target; ++k) {
      ++report.attempts;
      if (!results[k]) {
        ++report.dead_ends;
        continue;
      }
      if (!seen.insert(dedup_key(*results[k])).second) {
        ++report.duplicates;
        continue;
      }
      if (typed_sink) typed_sink(typed[k]);
      sink(*results[k]);
      ++report.emitted;
    }
    next += batch;
  }
  if (report.emitted < target) throw PartialOutputError(report.emitted, target, report.attempts);
  return report;
}

std::vector<QAPair> generate_split(const SplitRecipe& recipe, const KnowledgeSlice& slice,
                                   GenerationReport* report) {
  SplitGenerator gen(recipe, slice);
  std::vector<QAPair> out;
  out.reserve(recipe.target_count);
  auto r = gen.run([&](const QAPair& p) { out.push_back(p); });
  if (report) *report = r;
  return out;
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view text) {
  if (text == "jsonl") return CorpusFormat::Jsonl;
  if (text == "tsv") return CorpusFormat::Tsv;
  return std::nullopt;
}

nlohmann::ordered_json to_json(const QAPair& pair) {
  nlohmann::ordered_json j;
  j["question"] = pair.question;
  j["query"] = pair.query;
  j["type"] = to_string(pair.question_type);
  j["template_id"] = pair.template_id;
  j["depth"] = pair.depth;
  j["entity_ids"] = pair.entity_ids;
  j["predicate_ids"] = pair.predicate_ids;
  return j;
}

QAPair pair_from_json(const nlohmann::json& j) {
  QAPair p;
  p.question = j.at("question").get<std::string>();
  p.query = j.at("query").get<std::string>();
  auto type = parse_question_type(j.at("type").get<std::string>());
  if (!type) throw ValidationError("unknown question type " + j.at("type").dump());
  p.question_type = *type;
  p.template_id = j.at("template_id").get<std::string>();
  p.depth = j.at("depth").get<int>();
  p.entity_ids = j.at("entity_ids").get<std::vector<std::string>>();
  p.predicate_ids = j.at("predicate_ids").get<std::vector<std::vector<std::string>>>();
  return p;
}

void CorpusWriter::write(const QAPair& pair) {
  if (format_ == CorpusFormat::Jsonl) {
    *out_ << to_json(pair).dump() << '\n';
  } else {
    *out_ << pair.question << '\t' << pair.query << '\n';
  }
}

void write_corpus(const std::vector<QAPair>& pairs, const std::string& path, CorpusFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  CorpusWriter writer(out, format);
  for (const auto& p : pairs) writer.write(p);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

std::vector<QAPair> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::vector<QAPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(path, line_no, "malformed corpus record");
    try {
      pairs.push_back(pair_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return pairs;
}

CorpusStats compute_stats(const std::vector<QAPair>& corpus, const KnowledgeSlice& slice) {
  std::map<std::string, std::set<std::string>> predicate_labels, entity_labels;
  for (const auto& p : slice.predicates) predicate_labels[p.id].insert(p.labels.begin(), p.labels.end());
  for (const auto& e : slice.entities) entity_labels[e.id].insert(e.labels.begin(), e.labels.end());

  CorpusStats s;
  std::set<std::string> used_predicates, used_entities;
  for (const auto& pair : corpus) {
    ++s.pairs;
    ++s.per_type[pair.question_type];
    ++s.depth_histogram[pair.depth];
    for (const auto& id : pair.entity_ids) {
      if (!entity_labels.contains(id)) throw IntegrityError("corpus references unknown entity " + id);
      used_entities.insert(id);
    }
    for (const auto& chain : pair.predicate_ids) {
      for (const auto& id : chain) {
        if (!predicate_labels.contains(id))
          throw IntegrityError("corpus references unknown predicate " + id);
        used_predicates.insert(id);
      }
    }
  }
  s.unique_predicates = used_predicates.size();
  s.unique_entities = used_entities.size();
  std::set<std::string> entity_strings;
  for (const auto& id : used_predicates) s.predicate_labels += predicate_labels[id].size();
  for (const auto& id : used_entities) {
    s.entity_labels += entity_labels[id].size();
    entity_strings.insert(entity_labels[id].begin(), entity_labels[id].end());
  }
  s.unique_entity_label_strings = entity_strings.size();
  if (s.unique_predicates > 0) {
    const auto n = static_cast<double>(s.unique_predicates);
    s.mean_predicate_labels = static_cast<double>(s.predicate_labels) / n;
    s.mean_predicate_aliases = static_cast<double>(s.predicate_labels - s.unique_predicates) / n;
  }
  if (s.unique_entities > 0) {
    const auto n = static_cast<double>(s.unique_entities);
    s.mean_entity_labels = static_cast<double>(s.entity_labels) / n;
    s.mean_entity_aliases = static_cast<double>(s.entity_labels - s.unique_entities) / n;
  }
  return s;
}

CorpusStats compute_stats(const std::string& corpus_path, const KnowledgeSlice& slice) {
  return compute_stats(read_corpus(corpus_path), slice);
}

std::string format_stats(const CorpusStats& s) {
  std::string out = fmt::format("pairs: {}\n", s.pairs);
  for (auto type : {QuestionType::SingleEntity, QuestionType::MultiEntity, QuestionType::Count}) {
    auto it = s.per_type.find(type);
    out += fmt::format("  {}: {}\n", to_string(type), it == s.per_type.end() ? 0 : it->second);
  }
  out += fmt::format("unique predicates: {}\n", s.unique_predicates);
  out += fmt::format("predicate labels: {}\n", s.predicate_labels);
  out += fmt::format("mean labels per predicate: {:.2f}\n", s.mean_predicate_labels);
  out += fmt::format("mean aliases per predicate (excluding primary): {:.2f}\n", s.mean_predicate_aliases);
  out += fmt::format("unique entities: {}\n", s.unique_entities);
  out += fmt::format("entity labels: {}\n", s.entity_labels);
  out += fmt::format("unique entity label strings: {}\n", s.unique_entity_label_strings);
  out += fmt::format("mean labels per entity: {:.2f}\n", s.mean_entity_labels);
  out += fmt::format("mean aliases per entity (excluding primary): {:.2f}\n", s.mean_entity_aliases);
  out += "template depth histogram:\n";
  for (const auto& [depth, n] : s.depth_histogram) out += fmt::format("  {}: {}\n", depth, n);
  return out;
}

nlohmann::ordered_json to_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["pairs"] = s.pairs;
  nlohmann::ordered_json per_type;
  for (auto type : {QuestionType::SingleEntity, QuestionType::MultiEntity, QuestionType::Count}) {
    auto it = s.per_type.find(type);
    per_type[std::string(to_string(type))] = it == s.per_type.end() ? 0 : it->second;
  }
  j["per_type"] = per_type;
  j["unique_predicates"] = s.unique_predicates;
  j["predicate_labels"] = s.predicate_labels;
  j["mean_predicate_labels"] = fmt::format("{:.2f}", s.mean_predicate_labels);
  j["mean_predicate_aliases"] = fmt::format("{:.2f}", s.mean_predicate_aliases);
  j["unique_entities"] = s.unique_entities;
  j["entity_labels"] = s.entity_labels;
  j["unique_entity_label_strings"] = s.unique_entity_label_strings;
  j["mean_entity_labels"] = fmt::format("{:.2f}", s.mean_entity_labels);
  j["mean_entity_aliases"] = fmt::format("{:.2f}", s.mean_entity_aliases);
  nlohmann::ordered_json hist;
  for (const auto& [depth, n] : s.depth_histogram) hist[std::to_string(depth)] = n;
  j["depth_histogram"] = hist;
  return j;
}

}  // namespace squit
