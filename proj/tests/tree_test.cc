#include "parsegen/tree.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "parsegen/interp.h"
#include "test_util.h"

namespace parsegen {
namespace {

using testing::Bmp;
using testing::Wav;

std::map<std::size_t, IrProgram> Summaries(const std::vector<CorpusEntry>& corpus,
                                           const std::vector<std::size_t>& which) {
  std::map<std::size_t, IrProgram> out;
  for (std::size_t i : which) {
    out[i] = SummarizeBest(AbstractTrace(TracedParse(corpus[i].bytes, corpus[i].name).log));
  }
  return out;
}

std::vector<std::size_t> All(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

TEST(PickAHew, HandExample) {
  std::vector<std::uint8_t> g1 = {1, 5}, g2 = {1, 6}, b1 = {2, 5};
  std::vector<std::span<const std::uint8_t>> good = {g1, g2}, bad = {b1};
  EXPECT_EQ(PickAHew(good, bad, 32), (Predicate{0, 1}));
}

TEST(PickAHew, IdenticalHeadersGiveMinimum) {
  std::vector<std::uint8_t> a = {7, 3, 9}, b = {7, 3, 9};
  std::vector<std::span<const std::uint8_t>> good = {a}, bad = {b};
  EXPECT_EQ(PickAHew(good, bad, 32), (Predicate{0, 7}));
}

TEST(PickAHew, BitDepthSeparatesBitmaps) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp16", "bmp24", "bmp32"}, 6, 3);
  std::vector<std::span<const std::uint8_t>> good, bad;
  for (const CorpusEntry& e : c) (e.bytes[28] == 24 ? good : bad).push_back(e.bytes);
  EXPECT_EQ(PickAHew(good, bad, 32), (Predicate{28, 24}));
}

TEST(PickAHew, OnlyLooksInsideHeader) {
  std::vector<std::uint8_t> a = {0, 0, 0, 1}, b = {0, 0, 0, 2};
  std::vector<std::span<const std::uint8_t>> good = {a}, bad = {b};
  EXPECT_EQ(PickAHew(good, bad, 3).index, 0u);
  EXPECT_EQ(PickAHew(good, bad, 4), (Predicate{3, 1}));
}

TEST(Predicate, ShortFilesDoNotMatch) {
  std::vector<std::uint8_t> f = {1, 2};
  EXPECT_TRUE((Predicate{1, 2}).Eval(f));
  EXPECT_FALSE((Predicate{5, 0}).Eval(f));
  EXPECT_EQ((Predicate{28, 24}).ToString(), "in[28] == 24");
}

TEST(BuildTree, SingleTypeIsOneLeaf) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp24"}, 5, 2);
  TreeBuilder b(c);
  ParserTree t = b.Build(All(c.size()), Summaries(c, {0, 1}), TreeOptions{});
  EXPECT_TRUE(t.is_leaf());
  ASSERT_TRUE(t.parser);
  EXPECT_EQ(TestParser(t, c).parseable.size(), c.size());
}

TEST(BuildTree, WaveChannelsSplitOnHeaderByte) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"wav-m8", "wav-s16"}, 4, 5);
  TreeOptions o;
  o.header_size = 64;
  TreeBuilder b(c);
  ParserTree t = b.Build(All(c.size()), Summaries(c, All(c.size())), o);
  ASSERT_FALSE(t.is_leaf());
  EXPECT_TRUE(t.predicate->index == 22 || t.predicate->index == 32) << t.predicate->ToString();
  EXPECT_EQ(Leaves(t).size(), 2u);
  EXPECT_EQ(TestParser(t, c).parseable.size(), c.size());
}

TEST(BuildTree, WithheldLogsLeaveNullLeaf) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp24", "fwc"}, 3, 5);
  std::vector<std::size_t> bmp;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].bytes[0] == 'B') bmp.push_back(i);
  }
  TreeBuilder b(c);
  ParserTree t = b.Build(All(c.size()), Summaries(c, {bmp[0]}), TreeOptions{});
  ASSERT_FALSE(t.is_leaf());
  ASSERT_TRUE(t.sat->is_leaf() && t.unsat->is_leaf());
  EXPECT_NE(!t.sat->parser, !t.unsat->parser);
  ParseReport r = TestParser(t, c);
  EXPECT_EQ(r.parseable, bmp);
}

TEST(BuildTree, IdenticalHeadersCannotSplit) {
  CorpusEntry a = testing::EntryFor(Bmp("bmp24", 4, 4), 1, "a");
  CorpusEntry b = a;
  b.name = "b";
  b.expected->at("pixels")[0] ^= 1;
  std::vector<CorpusEntry> c = {a, b};
  TreeBuilder builder(c);
  EXPECT_THROW(builder.Build(All(2), Summaries(c, {0}), TreeOptions{}), HeaderSizeError);
}

TEST(TestParser, NullLeafRejectsEverything) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp24", "wav-m8"}, 2, 1);
  ParseReport r = TestParser(ParserTree::Leaf(nullptr), c);
  EXPECT_TRUE(r.parseable.empty());
  EXPECT_EQ(r.unparseable.size(), c.size());
  for (const Verdict& v : r.verdicts) EXPECT_EQ(v.kind, Verdict::Kind::kRejected);
}

TEST(TestParser, MismatchReportsFirstOffset) {
  std::vector<CorpusEntry> c = {testing::EntryFor(Bmp("bmp24", 4, 3), 1),
                                testing::EntryFor(Bmp("bmp24", 4, 3), 2)};
  IrProgram p = SummarizeBest(AbstractTrace(TracedParse(c[0].bytes, c[0].name).log));
  ParserTree t = ParserTree::Leaf(std::make_shared<const IrProgram>(p));
  ParseReport r = TestParser(t, c);
  EXPECT_EQ(r.verdicts[0].kind, Verdict::Kind::kExact);
  c[0].expected->at("pixels")[7] ^= 0xFF;
  r = TestParser(t, c);
  EXPECT_EQ(r.verdicts[0].kind, Verdict::Kind::kMismatch);
  EXPECT_EQ(r.verdicts[0].array, "pixels");
  EXPECT_EQ(r.verdicts[0].offset, 7);
}

TEST(TestParser, ErrorsBecomeVerdicts) {
  CorpusEntry e = testing::EntryFor(Bmp("bmp24", 4, 3), 1);
  IrProgram p = SummarizeBest(AbstractTrace(TracedParse(e.bytes, e.name).log));
  e.bytes.resize(20);
  Verdict v = CheckProgram(p, e);
  EXPECT_EQ(v.kind, Verdict::Kind::kError);
  EXPECT_EQ(v.error, "read-past-end");
}

TEST(Expand, SingleTypeOneRound) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp24"}, 12, 8);
  ExpandResult r = ExpandLogsUntilConverged(c, testing::TracerFor(c), ExpandOptions{});
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(r.rounds.size(), 1u);
  EXPECT_LE(r.logs.size(), 10u);
  EXPECT_TRUE(r.tree.is_leaf());
}

TEST(Expand, MixedCorpusConverges) {
  std::vector<CorpusEntry> c = testing::MakeCorpus(testing::MixedTokens(), 5, 6);
  ExpandResult r = ExpandLogsUntilConverged(c, testing::TracerFor(c), ExpandOptions{});
  ASSERT_TRUE(r.converged) << r.diagnostic;
  EXPECT_EQ(r.report.parseable.size(), c.size());
  EXPECT_GE(Leaves(r.tree).size(), testing::MixedTokens().size());
  for (const Predicate& p : Predicates(r.tree)) EXPECT_LT(p.index, r.header_size);
  // Leaf isolation: every file routed to a leaf parses there.
  for (const CorpusEntry& e : c) {
    const ParserTree& leaf = r.tree.Route(e.bytes);
    ASSERT_TRUE(leaf.parser);
    EXPECT_EQ(Interpret(*leaf.parser, e.bytes), *e.expected) << e.name;
  }
  std::uint64_t sum = 0;
  for (const RoundReport& rr : r.rounds) sum += rr.traced_bytes;
  EXPECT_EQ(sum, r.traced_bytes);
  EXPECT_EQ(r.rounds.back().unparseable, 0u);
}

TEST(Expand, DeterministicDot) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp24", "wav-s8", "fwc"}, 4, 9);
  ExpandOptions o;
  o.strategy = Strategy::kRandom;
  o.seed = 5;
  ExpandResult a = ExpandLogsUntilConverged(c, testing::TracerFor(c), o);
  ExpandResult b = ExpandLogsUntilConverged(c, testing::TracerFor(c), o);
  EXPECT_EQ(ExportDot(a.tree), ExportDot(b.tree));
  EXPECT_EQ(a.traced_bytes, b.traced_bytes);
}

TEST(Expand, SmallestTracesLessThanLargest) {
  SizeRange wide{2, 120, 16, 20000, 1, 20000};
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp24", "wav-m16", "fwc"}, 12, 4, wide);
  ExpandOptions small, large;
  large.strategy = Strategy::kLargest;
  ExpandResult s = ExpandLogsUntilConverged(c, testing::TracerFor(c), small);
  ExpandResult l = ExpandLogsUntilConverged(c, testing::TracerFor(c), large);
  ASSERT_TRUE(s.converged && l.converged);
  EXPECT_LT(s.traced_bytes, l.traced_bytes);
}

TEST(Expand, RejectedFilesAreNotTargets) {
  std::vector<CorpusEntry> c = testing::MakeCorpus({"bmp24"}, 3, 8);
  CorpusEntry junk{"junk", {1, 2, 3}, std::nullopt};
  c.push_back(junk);
  ExpandResult r = ExpandLogsUntilConverged(c, testing::TracerFor(c), ExpandOptions{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.report.verdicts.back().kind, Verdict::Kind::kRejected);
}

TEST(Strategy, Names) {
  for (Strategy s : {Strategy::kSmallest, Strategy::kLargest, Strategy::kRandom}) {
    EXPECT_EQ(ParseStrategy(StrategyName(s)), s);
  }
  EXPECT_THROW(ParseStrategy("median"), std::invalid_argument);
}

TEST(Dot, NullLeaf) {
  std::string dot = ExportDot(ParserTree::Leaf(nullptr));
  EXPECT_EQ(std::count(dot.begin(), dot.end(), '['), 2);  // node defaults and the single node
  EXPECT_EQ(dot.find("->"), std::string::npos);
}

TEST(Dot, TwoLeaves) {
  ParserTree t = ParserTree::Node({28, 24}, ParserTree::Leaf(nullptr), ParserTree::Leaf(nullptr));
  std::string dot = ExportDot(t);
  EXPECT_NE(dot.find("in[28] == 24"), std::string::npos);
  EXPECT_NE(dot.find("label=\"true\""), std::string::npos);
  EXPECT_NE(dot.find("label=\"false\""), std::string::npos);
  EXPECT_EQ(std::count(dot.begin(), dot.end(), '\n'), 3 + 5);  // header, defaults, close; 3 nodes, 2 edges
}

}  // namespace
}  // namespace parsegen
