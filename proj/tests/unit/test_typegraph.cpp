#include <gtest/gtest.h>

#include "oracles.hpp"
#include "squit/kb.hpp"
#include "squit/typegraph.hpp"

using namespace squit;

namespace {

PredicateRecord pred(std::string id, std::string from, std::string to, Pos pos = Pos::Noun) {
  return {std::move(id), {"label"}, pos, std::move(from), std::move(to)};
}

std::vector<PredicateRecord> fixture() {
  return {
      pred("P5", "film", "person"),
      pred("P57", "film", "person"),
      pred("P25", "person", "person"),
      pred("P50", "literary work", "person"),
      pred("P915", "film", "location"),
      pred("P86", "television series", "person"),
      pred("P551", "person", "location"),
      pred("P840", "film", "location", Pos::VerbAdp),
      pred("P1412", "person", "language"),
      pred("P17", "location", "country"),
      pred("P495", "film", "country"),
      pred("P495", "literary work", "country"),
      pred("P166", "person", "award"),
      pred("P166", "film", "award"),
      pred("P737", "person", "person", Pos::VerbAdp),
      pred("P136", "film", "genre"),
      pred("P136", "television series", "genre"),
      pred("P361", "location", "location"),
  };
}

std::vector<std::string> ids_of(const TypeGraph& g, const PredicatePath& path) {
  std::vector<std::string> out;
  for (const auto& step : path.steps) {
    for (const auto& e : g.edges())
      if (e.signature == step.signature) {
        out.push_back(e.predicates.front().id);
        break;
      }
  }
  return out;
}

}  // namespace

TEST(TypeGraph, TwoSignaturesGiveTwoNodesAndASelfLoop) {
  auto g = build_graph({pred("P50", "literary work", "person"), pred("P25", "person", "person")});
  EXPECT_EQ(g.nodes().size(), 2u);
  ASSERT_EQ(g.edges().size(), 2u);
  int loops = 0;
  for (const auto& e : g.edges())
    if (e.signature.from == e.signature.to) {
      ++loops;
      EXPECT_EQ(e.signature.from, "person");
    }
  EXPECT_EQ(loops, 1);
}

TEST(TypeGraph, SingleSelfLoop) {
  auto g = build_graph({pred("P1", "A", "A")});
  EXPECT_EQ(g.nodes().size(), 1u);
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(g.edges()[0].signature, (Signature{"A", "A"}));
}

TEST(TypeGraph, EmptyInputIsRejected) {
  try {
    build_graph({});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()), "empty graph");
  }
}

TEST(TypeGraph, EdgesAggregatePredicatesBySignature) {
  auto g = build_graph(fixture());
  for (const auto& e : g.edges()) {
    EXPECT_TRUE(g.has_node(e.signature.from));
    EXPECT_TRUE(g.has_node(e.signature.to));
    if (e.signature == Signature{"film", "person"}) EXPECT_EQ(e.predicates.size(), 2u);
  }
  EXPECT_EQ(g.signatures_of("P495").size(), 2u);
  EXPECT_TRUE(g.signatures_of("P0").empty());
  EXPECT_NE(g.to_dot().find("digraph"), std::string::npos);
}

TEST(TypeGraph, DirectorThenMother) {
  auto g = build_graph({pred("P5", "film", "person"), pred("P25", "person", "person")});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto path = sample_unidirectional_path(g, "film", 2, rng);
    ASSERT_EQ(path.size(), 2u);
    EXPECT_EQ(path.steps[0].signature, (Signature{"film", "person"}));
    EXPECT_EQ(path.steps[1].signature, (Signature{"person", "person"}));
    EXPECT_EQ(path.end_type(), "person");
  }
}

TEST(TypeGraph, ForcedChoiceIgnoresSeed) {
  auto g = build_graph(fixture());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto path = sample_unidirectional_path(g, "language", 0, rng);
    EXPECT_EQ(path.end_type(), "language");
    Rng rng2(seed);
    auto one = sample_unidirectional_path(g, "location", {std::optional<Pos>{}}, rng2);
    EXPECT_EQ(one.start_type, "location");
  }
  auto g2 = build_graph({pred("P1", "A", "B"), pred("P2", "C", "A")});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto path = sample_unidirectional_path(g2, "A", 1, rng);
    EXPECT_EQ(path.steps[0].signature, (Signature{"A", "B"}));
  }
}

TEST(TypeGraph, FixedSeedIsReproducible) {
  auto g = build_graph(fixture());
  auto walk = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::string out;
    try {
      for (const auto& step : sample_unidirectional_path(g, "person", 3, rng).steps)
        out += step.signature.from + ">" + step.signature.to + ";";
    } catch (const DeadEndError& e) {
      out = std::string("dead end: ") + e.what();
    }
    return out;
  };
  EXPECT_EQ(walk(42), walk(42));
  int complete = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = walk(seed);
    EXPECT_EQ(a, walk(seed));
    if (a.rfind("dead end", 0) != 0) ++complete;
  }
  EXPECT_GT(complete, 0);
}

TEST(TypeGraph, DeadEndCarriesPartialPath) {
  auto g = build_graph({pred("P5", "film", "person"), pred("P1412", "person", "language")});
  Rng rng(1);
  try {
    sample_unidirectional_path(g, "film", 3, rng);
    FAIL();
  } catch (const DeadEndError& e) {
    EXPECT_EQ(e.partial().size(), 2u);
    EXPECT_EQ(e.partial().end_type(), "language");
  }
}

TEST(TypeGraph, PosConstraintRestrictsEdges) {
  auto g = build_graph(fixture());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto path = sample_unidirectional_path(g, "film", {Pos::VerbAdp}, rng);
    EXPECT_EQ(path.steps[0].signature, (Signature{"film", "location"}));
    EXPECT_EQ(path.steps[0].pos, Pos::VerbAdp);
  }
}

TEST(TypeGraph, UnknownStartIsContractError) {
  auto g = build_graph(fixture());
  Rng rng(1);
  EXPECT_THROW(sample_unidirectional_path(g, "planet", 1, rng), ContractError);
}

TEST(TypeGraph, BidirectionalBindMeetsAtOwnType) {
  auto g = build_graph({pred("P50", "literary work", "person"), pred("P25", "person", "person")});
  Rng rng(3);
  auto [a, b] = sample_bidirectional_pair(g, 0, 1, "person", "literary work", rng);
  EXPECT_EQ(a.size(), 0u);
  EXPECT_EQ(b.steps[0].signature, (Signature{"literary work", "person"}));
  EXPECT_EQ(a.end_type(), "person");
  EXPECT_EQ(b.end_type(), "person");
}

TEST(TypeGraph, BidirectionalZeroZero) {
  auto g = build_graph(fixture());
  Rng rng(3);
  auto [a, b] = sample_bidirectional_pair(g, 0, 0, "film", "film", rng);
  EXPECT_EQ(a.end_type(), "film");
  EXPECT_EQ(b.end_type(), "film");
}

TEST(TypeGraph, BidirectionalLionAndColdCase) {
  auto g = build_graph({pred("P915", "film", "location"), pred("P86", "television series", "person"),
                        pred("P551", "person", "location")});
  Rng rng(8);
  auto [a, b] = sample_bidirectional_pair(g, 1, 2, "film", "television series", rng);
  EXPECT_EQ(a.end_type(), "location");
  EXPECT_EQ(b.end_type(), "location");
  EXPECT_EQ(ids_of(g, a), (std::vector<std::string>{"P915"}));
  EXPECT_EQ(ids_of(g, b), (std::vector<std::string>{"P86", "P551"}));
}

TEST(TypeGraph, BidirectionalUnreachableMeetingIsDeadEnd) {
  auto g = build_graph({pred("P1412", "person", "language"), pred("P136", "film", "genre")});
  Rng rng(1);
  EXPECT_THROW(sample_bidirectional_pair(g, 1, 1, "person", "film", rng), DeadEndError);
}

TEST(TypeGraph, SampledPairsAlwaysMeetAndValidate) {
  auto g = build_graph(fixture());
  const std::vector<std::string> starts = {"film", "person", "literary work", "television series"};
  int produced = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    Rng rng(seed);
    const auto& sa = starts[seed % 4];
    const auto& sb = starts[(seed / 4) % 4];
    try {
      auto [a, b] = sample_bidirectional_pair(g, seed % 3, 1 + seed % 2, sa, sb, rng);
      ++produced;
      EXPECT_EQ(a.end_type(), b.end_type());
      for (const auto* p : {&a, &b}) {
        std::string from = p->start_type;
        for (const auto& step : p->steps) {
          EXPECT_EQ(step.signature.from, from);
          from = step.signature.to;
        }
      }
    } catch (const DeadEndError&) {
    }
  }
  EXPECT_GT(produced, 100);
}

TEST(TypeGraph, ValidateChainExamples) {
  auto g = build_graph(fixture());
  EXPECT_TRUE(validate_chain(g, "film", {"P5", "P25"}));
  EXPECT_FALSE(validate_chain(g, "film", {"P25"}));
  EXPECT_TRUE(validate_chain(g, "film", {}));
  std::string why;
  EXPECT_FALSE(validate_chain(g, "film", {"P9999"}, &why));
  EXPECT_NE(why.find("P9999"), std::string::npos);
  // Either signature of P495 may start the chain.
  EXPECT_TRUE(validate_chain(g, "literary work", {"P495"}));
}

TEST(TypeGraph, ValidateChainAgreesWithBruteForce) {
  auto preds = fixture();
  auto g = build_graph(preds);
  std::vector<std::string> ids;
  for (const auto& p : preds) ids.push_back(p.id);
  const std::vector<std::string> starts = {"film", "person", "literary work", "television series",
                                           "location", "planet"};
  Rng rng(99);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<std::string> chain;
    const auto len = rng.uniform(4);
    for (std::uint64_t i = 0; i < len; ++i) chain.push_back(ids[rng.uniform(ids.size())]);
    const auto& start = starts[rng.uniform(starts.size())];
    EXPECT_EQ(validate_chain(g, start, chain),
              squit::testing::brute_force_chain_valid(preds, start, chain))
        << start << " len " << len;
  }
}

TEST(TypeGraph, SampledPathsValidate) {
  auto preds = fixture();
  auto g = build_graph(preds);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    try {
      auto path = sample_unidirectional_path(g, "film", 1 + seed % 3, rng,
                                             seed % 2 ? StepPolicy::PredicateUniform
                                                      : StepPolicy::EdgeUniform);
      EXPECT_TRUE(validate_chain(g, "film", ids_of(g, path)));
    } catch (const DeadEndError&) {
    }
  }
}
