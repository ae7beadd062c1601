#include <gtest/gtest.h>

#include "squit/error.hpp"
#include "squit/fuzz.hpp"

using namespace squit;

namespace {

FuzzConfig only(double filler, double kase, double noise) {
  FuzzConfig c;
  c.filler_prob = filler;
  c.case_prob = kase;
  c.char_noise_prob = noise;
  return c;
}

}  // namespace

TEST(Fuzz, ForcedSwap) {
  FuzzText q{"abcd", {}};
  apply_char_edit(q, 1, CharEdit::Swap);
  EXPECT_EQ(q.text, "acbd");
}

TEST(Fuzz, DeleteAndDuplicateShiftLaterSpans) {
  FuzzText q{"ab XY", {{3, 2}}};
  apply_char_edit(q, 0, CharEdit::Duplicate);
  EXPECT_EQ(q.text, "aab XY");
  EXPECT_EQ(q.protected_spans[0], (Span{4, 2}));
  apply_char_edit(q, 1, CharEdit::Delete);
  EXPECT_EQ(q.text, "ab XY");
  EXPECT_EQ(q.protected_spans[0], (Span{3, 2}));
}

TEST(Fuzz, MultibyteCharactersMoveWhole) {
  FuzzText q{"\xC3\xA4" "b", {}};
  apply_char_edit(q, 0, CharEdit::Swap);
  EXPECT_EQ(q.text, "b\xC3\xA4");
  EXPECT_EQ(noise_eligible_chars(q), 2u);
}

TEST(Fuzz, EditPastEndIsContractError) {
  FuzzText q{"ab", {}};
  EXPECT_THROW(apply_char_edit(q, 2, CharEdit::Delete), ContractError);
  EXPECT_THROW(apply_char_edit(q, 1, CharEdit::Swap), ContractError);
}

TEST(Fuzz, HeyFiller) {
  FuzzConfig c = only(1.0, 0, 0);
  c.filler_list = {"Hey"};
  FuzzText q{"how many distributor does ethyl cellosolve have?", {{26, 16}}};
  Rng rng(1);
  EXPECT_TRUE(add_filler(q, c, rng));
  EXPECT_EQ(q.text, "Hey how many distributor does ethyl cellosolve have?");
  EXPECT_EQ(q.text.substr(q.protected_spans[0].begin, q.protected_spans[0].length),
            "ethyl cellosolve");
}

TEST(Fuzz, FillerChoiceReproducible) {
  FuzzConfig c = only(1.0, 0, 0);
  c.filler_list = {"Hey", "Tell me"};
  for (int run = 0; run < 2; ++run) {
    std::vector<std::string> got;
    for (std::uint64_t i = 0; i < 20; ++i) {
      FuzzText q{"x", {}};
      auto rng = Rng::derive(3, i);
      add_filler(q, c, rng);
      got.push_back(q.text);
    }
    static std::vector<std::string> first;
    if (run == 0) first = got;
    else EXPECT_EQ(first, got);
  }
}

TEST(Fuzz, ZeroProbabilitiesAreIdentity) {
  FuzzConfig c = only(0, 0, 0);
  EXPECT_TRUE(c.is_identity());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    FuzzText q{"Who is the mother of the director of Pulp Fiction?", {{37, 12}}};
    Rng rng(seed);
    auto r = fuzz_question(q, c, rng);
    EXPECT_EQ(q.text, "Who is the mother of the director of Pulp Fiction?");
    EXPECT_FALSE(r.filler_added);
    EXPECT_EQ(r.case_flips + r.char_edits, 0u);
  }
}

TEST(Fuzz, CaseFlipsFirstLetters) {
  FuzzText q{"do you know how much", {}};
  Rng rng(1);
  EXPECT_EQ(perturb_case(q, only(0, 1.0, 0), rng), 5u);
  EXPECT_EQ(q.text, "Do You Know How Much");
}

TEST(Fuzz, CaseDrawsOncePerWord) {
  FuzzText q{"a b [c] d e?", {{4, 3}}};
  Rng used(9), reference(9);
  perturb_case(q, only(0, 0.5, 0), used);
  reference.discard(5);
  EXPECT_EQ(used, reference);
}

TEST(Fuzz, CaseStreamContinues) {
  // Two passes from one stream equal a pass, then a pass from the stream
  // advanced past the first pass's draws.
  const std::string text = "what is the number of awards of bob";
  FuzzText twice{text, {}};
  Rng a(21);
  perturb_case(twice, only(0, 0.3, 0), a);
  perturb_case(twice, only(0, 0.3, 0), a);

  FuzzText split{text, {}};
  Rng b(21);
  perturb_case(split, only(0, 0.3, 0), b);
  Rng c(21);
  c.discard(8);
  perturb_case(split, only(0, 0.3, 0), c);
  EXPECT_EQ(twice.text, split.text);
}

TEST(Fuzz, ProtectedSpansSurviveHeavyNoise) {
  const std::string label = "Pulp Fiction";
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    FuzzText q{"Who is the mother of the director of Pulp Fiction?", {{37, 12}}};
    Rng rng(seed);
    fuzz_question(q, only(0.5, 0.9, 0.3), rng);
    ASSERT_EQ(q.protected_spans.size(), 1u);
    EXPECT_EQ(q.text.substr(q.protected_spans[0].begin, q.protected_spans[0].length), label)
        << q.text;
  }
}

TEST(Fuzz, NoiseIsReproducible) {
  auto run = [](std::uint64_t seed) {
    FuzzText q{"How many genre does Dem Taeter auf der Spur have?", {{20, 23}}};
    Rng rng(seed);
    fuzz_question(q, FuzzConfig::test_hard_defaults(), rng);
    return q.text;
  };
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_EQ(run(s), run(s));
}

TEST(Fuzz, PairQueryUntouched) {
  QAPair pair;
  pair.question = "Who is the mother of the director of Pulp Fiction?";
  pair.query = "SELECT ?end WHERE { [ Pulp Fiction ] wdt:P57 / wdt:P25 ?end . }";
  pair.entity_spans = {{37, 12}};
  const auto query = pair.query;
  Rng rng(4);
  fuzz_pair(pair, only(1, 1, 0.2), rng);
  EXPECT_EQ(pair.query, query);
  EXPECT_NE(pair.question.find("Pulp Fiction"), std::string::npos);
}

TEST(Fuzz, ConfigValidation) {
  EXPECT_THROW(only(1.5, 0, 0).validate(), ConfigError);
  EXPECT_THROW(only(0, -0.1, 0).validate(), ConfigError);
  FuzzConfig c = only(0.5, 0, 0);
  c.filler_list.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c.filler_prob = 0;
  EXPECT_NO_THROW(c.validate());
}

TEST(Fuzz, LocateEntitySpansFromQuery) {
  auto spans = locate_entity_spans(
      "Is John Steinbeck the author of Green Eggs and Ham?",
      "ASK { BIND ( [ John Steinbeck ] as ?end ) . [ Green Eggs and Ham ] wdt:P50 ?end . }");
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0], (Span{3, 14}));
  EXPECT_EQ(spans[1], (Span{32, 18}));
}

TEST(Fuzz, NoiseRateTracksExpectation) {
  const std::string text = "What is the country of origin of the thing made of trichloroethylene?";
  FuzzConfig c = only(0, 0, 0.05);
  double edits = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    FuzzText q{text, {}};
    auto rng = Rng::derive(5, static_cast<std::uint64_t>(i));
    edits += static_cast<double>(char_noise(q, c, rng));
  }
  const double expected = static_cast<double>(text.size()) * 0.05;
  EXPECT_NEAR(edits / n, expected, 0.1 * expected);
}
