#include "parsegen/generalize.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "parsegen/interp.h"
#include "test_util.h"

namespace parsegen {
namespace {

using testing::Bmp;
using testing::Wav;

struct Group {
  std::vector<CorpusEntry> files;
  std::vector<IrProgram> programs;
  std::vector<GroupExample> examples;
};

Group MakeGroup(const std::vector<FormatSpec>& specs, std::uint64_t seed = 1) {
  Group g;
  for (std::size_t i = 0; i < specs.size(); ++i) g.files.push_back(testing::EntryFor(specs[i], seed + i));
  for (const CorpusEntry& e : g.files) {
    g.programs.push_back(SummarizeBest(AbstractTrace(TracedParse(e.bytes, e.name).log)));
  }
  for (std::size_t i = 0; i < g.files.size(); ++i) {
    g.examples.push_back({&g.programs[i], g.files[i].bytes, &*g.files[i].expected});
  }
  return g;
}

GeneralizeResult Generalize(const Group& g, std::uint32_t header = 32,
                            VotingMode voting = VotingMode::kCartesian, std::uint64_t cap = 1000000) {
  GeneralizeOptions o;
  o.header_size = header;
  o.voting = voting;
  o.tuple_cap = cap;
  return GeneralizeGroup(g.examples, o);
}

const Definition* DefFor(const IrProgram& p, const std::string& symbol) {
  for (const Definition& d : p.defs) {
    if (d.symbol == symbol) return &d;
  }
  return nullptr;
}

bool Parses(const IrProgram& p, const FormatSpec& spec, std::uint64_t seed) {
  CorpusEntry e = testing::EntryFor(spec, seed);
  try {
    return Interpret(p, e.bytes) == *e.expected;
  } catch (const InterpError&) {
    return false;
  }
}

Candidate Lit(const std::string& key) {
  Candidate c;
  c.key = key;
  c.literals = 1;
  return c;
}

TEST(Rewrites, ProductOfBoundAndFactor) {
  std::vector<Candidate> c = EnumerateRewrites(183, {{"LOOP_BOUND_A", 61}, {"FACTOR_B_0", 3}});
  auto it = std::find_if(c.begin(), c.end(), [](const Candidate& x) {
    return x.def && x.def->rewrite == RewriteKind::kMul &&
           std::set<std::string>{x.def->x, x.def->y} == std::set<std::string>{"LOOP_BOUND_A", "FACTOR_B_0"};
  });
  EXPECT_NE(it, c.end());
  EXPECT_FALSE(c.front().literals);
}

TEST(Rewrites, NegatedBoundPlusOne) {
  std::vector<Candidate> c = EnumerateRewrites(-75, {{"LOOP_BOUND_B", 76}});
  EXPECT_TRUE(std::any_of(c.begin(), c.end(), [](const Candidate& x) {
    return x.def && x.def->rewrite == RewriteKind::kNegPlusOne && x.def->x == "LOOP_BOUND_B";
  }));
}

TEST(Rewrites, PaddedRowSize) {
  std::vector<Candidate> c = EnumerateRewrites(-184, {{"LOOP_BOUND_A", 61}, {"FACTOR_B_1", 3}});
  EXPECT_TRUE(std::any_of(c.begin(), c.end(), [](const Candidate& x) {
    return x.def && x.def->rewrite == RewriteKind::kPad4NegMul;
  }));
}

TEST(Rewrites, SquareAmbiguityListsEveryPair) {
  std::vector<Candidate> c = EnumerateRewrites(9, {{"A", 3}, {"B", 3}});
  std::set<std::string> keys;
  for (const Candidate& x : c) keys.insert(x.key);
  EXPECT_TRUE(keys.count("A * B"));
  EXPECT_TRUE(keys.count("A * A"));
  EXPECT_TRUE(keys.count("B * B"));
}

TEST(Rewrites, LiteralOnlyWhenNothingMatches) {
  std::vector<Candidate> c = EnumerateRewrites(1000, {{"A", 3}});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_FALSE(c[0].def);
  EXPECT_EQ(c[0].key, "1000");
}

TEST(Rewrites, ScopeOfOuterFactors) {
  CorpusEntry e = testing::EntryFor(Bmp("bmp24", 6, 5), 1);
  IrProgram p = Summarize(TracedParse(e.bytes, e.name).log, 3);
  std::vector<RewriteVar> vars = RewriteVariables(p);
  auto find = [&](const std::string& s) {
    return std::find_if(vars.begin(), vars.end(), [&](const RewriteVar& v) { return v.symbol == s; });
  };
  auto c0 = find("FACTOR_C_0");
  ASSERT_NE(c0, vars.end());
  EXPECT_TRUE(std::count(c0->scope.begin(), c0->scope.end(), "LOOP_BOUND_A"));
  EXPECT_FALSE(std::count(c0->scope.begin(), c0->scope.end(), "LOOP_BOUND_B"));
  auto add = find("ADDEND_C_1");
  ASSERT_NE(add, vars.end());
  EXPECT_TRUE(std::count(add->scope.begin(), add->scope.end(), "LOOP_BOUND_B"));
}

TEST(Vote, SingleFileUniqueCandidates) {
  CandidateTable t = {{{Lit("a")}, {Lit("b")}}};
  std::optional<VoteResult> r = VoteCartesian(t, 100);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->keys, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r->supporters, std::vector<std::size_t>{0});
}

TEST(Vote, DisjointFilesKeepOne) {
  CandidateTable t = {{{Lit("a")}}, {{Lit("b")}}};
  std::optional<VoteResult> r = VoteCartesian(t, 100);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->supporters.size(), 1u);
}

Candidate Field(const std::string& symbol, std::uint32_t offset, unsigned bytes) {
  Candidate c;
  Definition d;
  d.symbol = symbol;
  d.a = {offset, bytes, true};
  c.key = RenderDefinition(d);
  c.def = d;
  c.terms = 1;
  c.neg_bits = -static_cast<int>(bytes * 8);
  return c;
}

TEST(Vote, OverlappingFieldsLoseToLiteral) {
  Candidate lit = Lit("44");
  lit.literals = 1;
  CandidateTable t = {{{Field("A", 40, 4)}, {Field("B", 40, 1), lit}}};
  std::optional<VoteResult> r = VoteCartesian(t, 100);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->keys[1], "44");
  // Identical or disjoint fields are fine.
  t = {{{Field("A", 40, 4)}, {Field("B", 36, 4), lit}}};
  EXPECT_EQ(VoteCartesian(t, 100)->keys[1], Field("B", 36, 4).key);
}

TEST(Vote, CapFallsBack) {
  CandidateTable t = {{{Lit("a"), Lit("b")}, {Lit("c"), Lit("d")}}};
  EXPECT_FALSE(VoteCartesian(t, 3));
  EXPECT_TRUE(VoteCartesian(t, 4));
}

TEST(Vote, GreedyQualityGap) {
  // Greedy takes the widest single pick (var 0 = e0, three files) and is left
  // with one file; the tuple (e1, e2) keeps two.
  CandidateTable t = {{{Lit("e0")}, {Lit("e3")}},
                      {{Lit("e0")}, {Lit("e4")}},
                      {{Lit("e0")}, {Lit("e5")}},
                      {{Lit("e1")}, {Lit("e2")}},
                      {{Lit("e1")}, {Lit("e2")}}};
  std::optional<VoteResult> cart = VoteCartesian(t, 100);
  ASSERT_TRUE(cart);
  VoteResult greedy = VoteGreedy(t, AssignVariant::kConceptual);
  EXPECT_EQ(cart->supporters, (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(greedy.supporters.size(), 1u);
  EXPECT_EQ(VoteGreedy(t, AssignVariant::kOptimized).supporters, greedy.supporters);
}

AssignProblem RandomProblem(std::mt19937_64& rng, std::size_t v, std::size_t e, std::size_t f) {
  AssignProblem p;
  p.files = f;
  p.variables = v;
  for (std::size_t i = 0; i < e; ++i) p.expressions.push_back("e" + std::to_string(i));
  p.weights.assign(v, std::vector<std::vector<std::uint32_t>>(e, std::vector<std::uint32_t>(f, 0)));
  for (auto& ve : p.weights) {
    for (auto& ef : ve) {
      for (auto& w : ef) w = rng() % 2;
    }
  }
  return p;
}

TEST(ConsistentAssignment, SingleEverything) {
  AssignProblem p;
  p.files = 1;
  p.variables = 1;
  p.expressions = {"x"};
  p.weights = {{{1}}};
  for (AssignVariant v : {AssignVariant::kSimplest, AssignVariant::kConceptual, AssignVariant::kOptimized}) {
    AssignResult r = ConsistentAssignment(v, p);
    EXPECT_EQ(r.compatible, std::vector<std::size_t>{0});
    EXPECT_EQ(r.assignments, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  }
}

TEST(ConsistentAssignment, OptimizedMatchesConceptual) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    AssignProblem p = RandomProblem(rng, 1 + rng() % 4, 1 + rng() % 4, 1 + rng() % 4);
    AssignResult a = ConsistentAssignment(AssignVariant::kConceptual, p);
    AssignResult b = ConsistentAssignment(AssignVariant::kOptimized, p);
    EXPECT_EQ(a, b) << "instance " << i;
    std::uint64_t nnz = 0;
    for (auto& ve : p.weights) {
      for (auto& ef : ve) nnz += std::count_if(ef.begin(), ef.end(), [](std::uint32_t w) { return w > 0; });
    }
    EXPECT_LE(b.prune_calls, nnz);
    EXPECT_FALSE(ConsistentAssignment(AssignVariant::kSimplest, p).compatible.empty());
  }
}

TEST(Bind, BitmapDimensionsAreSignedWords) {
  Group g = MakeGroup({Bmp("bmp24", 61, 76), Bmp("bmp24", 20, 9), Bmp("bmp24", 7, 33)});
  GeneralizeResult r = Generalize(g);
  EXPECT_EQ(r.supporters.size(), 3u);
  const Definition* a = DefFor(r.program, "LOOP_BOUND_A");
  const Definition* b = DefFor(r.program, "LOOP_BOUND_B");
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->kind, Definition::Kind::kField);
  EXPECT_EQ(a->a, (FieldRef{18, 4, true}));
  EXPECT_EQ(b->kind, Definition::Kind::kField);
  EXPECT_EQ(b->a, (FieldRef{22, 4, true}));
  EXPECT_TRUE(Parses(r.program, Bmp("bmp24", 100, 3), 9));
  EXPECT_TRUE(Parses(r.program, Bmp("bmp24", 5, 120), 10));
}

TEST(Bind, WidestFieldWinsForSingleFile) {
  Group g = MakeGroup({Bmp("bmp24", 61, 76)});
  GeneralizeResult r = Generalize(g);
  const Definition* a = DefFor(r.program, "LOOP_BOUND_A");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->a.bytes, 4u);
  EXPECT_EQ(a->a.offset, 18u);
}

TEST(Bind, ContainerBaseStaysLiteral) {
  Group g = MakeGroup({testing::Fwc(5, 9), testing::Fwc(40, 3), testing::Fwc(17, 22)});
  GeneralizeResult r = Generalize(g);
  EXPECT_EQ(DefFor(r.program, "MIN_Y"), nullptr);
  EXPECT_EQ(ConcreteEnv(r.program).at("MIN_Y"), 32);
  const Definition* second = DefFor(r.program, "MIN_Y_N1");
  ASSERT_TRUE(second);
  EXPECT_EQ(second->kind, Definition::Kind::kAdjacency);
  EXPECT_EQ(second->nest, 0u);
  EXPECT_TRUE(Parses(r.program, testing::Fwc(300, 1), 4));
}

TEST(Bind, TopDownBoundIsAProduct) {
  Group g = MakeGroup({Bmp("bmp32-td", 6, 5), Bmp("bmp32-td", 9, 13), Bmp("bmp32-td", 17, 4)});
  GeneralizeResult r = Generalize(g);
  const Definition* a = DefFor(r.program, "LOOP_BOUND_A");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->kind, Definition::Kind::kProduct);
  EXPECT_EQ((std::set<std::uint32_t>{a->a.offset, a->b.offset}), (std::set<std::uint32_t>{18, 22}));
  EXPECT_TRUE(Parses(r.program, Bmp("bmp32-td", 40, 31), 5));
}

TEST(Generalize, SquareAmbiguityResolvedByOneRectangle) {
  std::vector<FormatSpec> specs;
  for (int s = 4; s < 14; ++s) specs.push_back(Bmp("bmp24", s, s));
  specs.push_back(Bmp("bmp24", 9, 14));
  GeneralizeResult r = Generalize(MakeGroup(specs));
  EXPECT_EQ(r.supporters.size(), specs.size());
  Lcg rng(4);
  for (int i = 0; i < 10; ++i) {
    std::int32_t w = static_cast<std::int32_t>(rng.Range(2, 60));
    std::int32_t h = w + static_cast<std::int32_t>(rng.Range(1, 20));
    EXPECT_TRUE(Parses(r.program, Bmp("bmp24", w, h), 100 + i)) << w << "x" << h;
    EXPECT_TRUE(Parses(r.program, Bmp("bmp24", h, w), 200 + i)) << h << "x" << w;
  }
}

TEST(Generalize, WaveNeedsLargerHeader) {
  Group g = MakeGroup({Wav("wav-m8", 30), Wav("wav-m8", 71), Wav("wav-m8", 200)});
  EXPECT_TRUE(Generalize(g, 32).header_limited);
  GeneralizeResult r = Generalize(g, 64);
  EXPECT_FALSE(r.header_limited);
  EXPECT_TRUE(Parses(r.program, Wav("wav-m8", 999), 3));
}

TEST(Generalize, GreedyVariantsAlsoGeneralize) {
  Group g = MakeGroup({Bmp("bmp24", 6, 9), Bmp("bmp24", 11, 4), Bmp("bmp24", 3, 7)});
  for (VotingMode m : {VotingMode::kSimplest, VotingMode::kConceptual, VotingMode::kOptimized}) {
    GeneralizeResult r = Generalize(g, 32, m);
    EXPECT_FALSE(r.supporters.empty());
  }
  GeneralizeResult capped = Generalize(g, 32, VotingMode::kCartesian, 1);
  EXPECT_TRUE(capped.fallback);
  EXPECT_EQ(capped.supporters.size(), 3u);
}

TEST(Generalize, RejectsBadGroups) {
  EXPECT_THROW(GeneralizeGroup({}, GeneralizeOptions{}), std::invalid_argument);
  Group g = MakeGroup({Bmp("bmp24", 6, 9), Wav("wav-m8", 10)});
  EXPECT_THROW(Generalize(g), std::invalid_argument);
}

TEST(Generalize, RewritesAreSound) {
  Group g = MakeGroup({Bmp("bmp24", 61, 76), Bmp("bmp24", 10, 3)});
  GeneralizeResult r = Generalize(g);
  for (std::size_t i : r.supporters) {
    SymbolEnv concrete = ConcreteEnv(g.programs[i]);
    SymbolEnv resolved = ResolveEnv(r.program, g.files[i].bytes);
    for (const Definition& d : r.program.defs) EXPECT_EQ(resolved.at(d.symbol), concrete.at(d.symbol)) << d.symbol;
  }
}

TEST(HeaderSchedule, Doubling) {
  EXPECT_EQ(HeaderSizeSchedule(), (std::vector<std::uint32_t>{32, 64, 128, 256, 512, 1024}));
  EXPECT_EQ(HeaderSizeSchedule(32, 32), std::vector<std::uint32_t>{32});
}

}  // namespace
}  // namespace parsegen
