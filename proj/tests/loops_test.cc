#include "parsegen/loops.h"

#include <gtest/gtest.h>

#include <cmath>

#include "parsegen/interp.h"
#include "test_util.h"

namespace parsegen {
namespace {

using testing::Bmp;
using testing::Wav;

// Record-level pairs of a bottom-up 24-bpp bitmap: output row r comes from
// file row h-1-r.
std::vector<IndexPair> BottomUpRows(std::int64_t w, std::int64_t h) {
  std::vector<IndexPair> pairs;
  const std::int64_t row = Pad4(w * 3);
  for (std::int64_t r = 0; r < h; ++r) {
    for (std::int64_t c = 0; c < w; ++c) pairs.push_back({r * w * 3 + c * 3, 54 + (h - 1 - r) * row + c * 3});
  }
  return pairs;
}

TEST(Interpolate, SingleLine) {
  std::vector<IndexPair> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({i, 44 + 2 * i});
  std::vector<AffineSegment> s = Interpolate(pairs);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (AffineSegment{0, 44, 10, 1, 2}));
}

TEST(Interpolate, SinglePoint) {
  std::vector<IndexPair> pairs = {{0, 5}};
  std::vector<AffineSegment> s = Interpolate(pairs);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].count, 1);
  EXPECT_EQ(s[0].in0, 5);
}

TEST(Interpolate, BitmapRows) {
  std::vector<AffineSegment> s = Interpolate(BottomUpRows(61, 76));
  ASSERT_EQ(s.size(), 76u);
  for (std::size_t r = 0; r < s.size(); ++r) {
    EXPECT_EQ(s[r].count, 61);
    if (r > 0) {
      EXPECT_EQ(s[r].in0 - s[r - 1].in0, -184);
    }
  }
}

TEST(Nest, RowsBecomeTwoLevels) {
  std::vector<NestItem> items;
  for (const AffineSegment& s : Interpolate(BottomUpRows(61, 76))) {
    items.push_back({0, s.out0, s.in0, {{s.count, s.out_step, s.in_step}}});
  }
  NestStats stats;
  std::vector<NestItem> nested = NestItems(items, &stats);
  ASSERT_EQ(nested.size(), 1u);
  ASSERT_EQ(nested[0].levels.size(), 2u);
  EXPECT_EQ(nested[0].levels[0].count, 61);
  EXPECT_EQ(nested[0].levels[1].count, 76);
  EXPECT_EQ(nested[0].levels[1].in_step, -184);
  // Monotone coverage: passes stay logarithmic in the number of points.
  EXPECT_LE(stats.passes, static_cast<std::size_t>(std::ceil(std::log2(61.0 * 76))) + 2);
}

TEST(Nest, SingleSegmentIsAFixedPoint) {
  std::vector<NestItem> items = {{0, 0, 10, {{4, 1, 1}}}};
  NestStats stats;
  std::vector<NestItem> nested = NestItems(items, &stats);
  ASSERT_EQ(nested.size(), 1u);
  EXPECT_EQ(nested[0].levels.size(), 1u);
  EXPECT_LE(stats.passes, 1u);
}

TEST(Summarize, StereoWaveLeftChannel) {
  CorpusEntry e = testing::EntryFor(Wav("wav-s16", 19840), 1);
  TraceLog log = TracedParse(e.bytes, e.name).log;
  unsigned stride = ChooseStride(log);
  IrProgram p = Summarize(log, stride);
  ASSERT_EQ(p.nests.size(), 2u);
  const LoopNest& left = p.nests[0];
  EXPECT_EQ(left.array, "ch0");
  ASSERT_EQ(left.levels.size(), 1u);
  EXPECT_EQ(left.levels[0].count, 19840);
  EXPECT_EQ(left.levels[0].step, 4);
  EXPECT_EQ(left.levels[0].in_factor * left.levels[0].step, 4);
  EXPECT_EQ(left.min_y, 44);
  EXPECT_EQ(p.nests[1].min_y, 46);
  EXPECT_EQ(Interpret(p, e.bytes), *e.expected);
}

TEST(Summarize, BottomUpBitmapFactors) {
  CorpusEntry e = testing::EntryFor(Bmp("bmp24", 61, 76), 1);
  IrProgram p = Summarize(TracedParse(e.bytes, e.name).log, 3);
  SymbolEnv env = ConcreteEnv(p);
  EXPECT_EQ(env.at("LOOP_BOUND_A"), 61);
  EXPECT_EQ(env.at("LOOP_BOUND_B"), 76);
  EXPECT_EQ(env.at("FACTOR_C_0"), 183);
  EXPECT_EQ(env.at("FACTOR_C_1"), -184);
  EXPECT_EQ(env.at("ADDEND_C_1"), -75);
  EXPECT_EQ(env.at("MIN_Y"), 54);
}

TEST(Summarize, EmptyLog) {
  TraceLog log;
  log.file_id = "empty";
  IrProgram p = Summarize(log, 1);
  EXPECT_TRUE(p.nests.empty());
  std::vector<std::uint8_t> none;
  EXPECT_TRUE(Interpret(p, none).empty());
}

TEST(ChooseStride, PixelWidths) {
  Lcg rng(3);
  for (int i = 0; i < 5; ++i) {
    const std::int32_t w = static_cast<std::int32_t>(rng.Range(2, 40));
    const std::int32_t h = static_cast<std::int32_t>(rng.Range(2, 40));
    EXPECT_EQ(ChooseStride(TracedParse(GenerateFile(Bmp("bmp24", w, h), 1), "a").log), 3u) << w << "x" << h;
    EXPECT_EQ(ChooseStride(TracedParse(GenerateFile(Bmp("bmp32", w, h), 1), "b").log), 4u) << w << "x" << h;
  }
}

TEST(ChooseStride, PureCopy) {
  EXPECT_EQ(ChooseStride(TracedParse(GenerateFile(testing::Fwc(40, 70), 1), "c").log), 1u);
}

TEST(ChooseStride, ParsimonyAndExactReplayAtEveryStride) {
  Lcg rng(21);
  for (const char* t : {"wav-m8", "wav-s16", "bmp16", "bmp24", "bmp24-td", "bmp32-v4-rgba", "fwc"}) {
    FormatSpec s = RandomSpec(t, rng, SizeRange{2, 14, 4, 80, 1, 80});
    CorpusEntry e = testing::EntryFor(s, 2);
    AbstractLog a = AbstractTrace(TracedParse(e.bytes, e.name).log);
    StrideChoice c = ChooseStride(a, 8);
    ASSERT_EQ(c.text_bytes.size(), 8u);
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_LE(c.text_bytes[c.stride - 1], c.text_bytes[k]) << t;
      IrProgram p = Summarize(a, static_cast<unsigned>(k + 1));
      EXPECT_EQ(ProgramText(p).size(), c.text_bytes[k]) << t;
      EXPECT_EQ(Interpret(p, e.bytes), *e.expected) << t << " stride " << k + 1;
    }
  }
}

TEST(Ir, ProgramTextNamesSymbols) {
  CorpusEntry e = testing::EntryFor(Bmp("bmp24", 5, 3), 1);
  std::string text = ProgramText(Summarize(TracedParse(e.bytes, e.name).log, 3));
  EXPECT_NE(text.find("LOOP_BOUND_A := 5;"), std::string::npos);
  EXPECT_NE(text.find("LOOP_BOUND_B := 3;"), std::string::npos);
  EXPECT_NE(text.find("STRIDE := 3;"), std::string::npos);
}

TEST(Ir, Pad4) {
  EXPECT_EQ(Pad4(-183), -184);
  EXPECT_EQ(Pad4(183), 184);
  EXPECT_EQ(Pad4(4), 4);
  EXPECT_EQ(Pad4(0), 0);
  EXPECT_EQ(Pad4(-1), -4);
}

}  // namespace
}  // namespace parsegen
