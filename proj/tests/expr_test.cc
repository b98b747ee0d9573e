#include "parsegen/expr.h"

#include <gtest/gtest.h>

#include "parsegen/formats.h"
#include "parsegen/trace.h"
#include "test_util.h"

namespace parsegen {
namespace {

ByteExpr C(u128 v, unsigned w) { return ByteExpr::Const(v, w); }
ByteExpr R(std::uint64_t o) { return ByteExpr::Read(o); }

ByteExpr Le16(std::uint64_t off) {
  return ByteExpr::Binary(Op::kOr, ByteExpr::ZeroExtend(16, R(off)),
                          ByteExpr::Shl(ByteExpr::ZeroExtend(16, R(off + 1)), C(8, 16)));
}

// 5-5-5 green channel scaled to 8 bits.
ByteExpr Green555(std::uint64_t off) {
  ByteExpr g = ByteExpr::Binary(Op::kAnd, ByteExpr::LShr(Le16(off), C(5, 16)), C(31, 16));
  ByteExpr scaled = ByteExpr::LShr(ByteExpr::Binary(Op::kMul, ByteExpr::ZeroExtend(32, g), C(33, 32)), C(2, 32));
  return ByteExpr::Extract(7, 0, scaled);
}

TEST(Eval, ConstantArithmetic) {
  ByteExpr e = ByteExpr::LShr(ByteExpr::Binary(Op::kMul, C(31, 32), C(33, 32)), C(2, 32));
  std::vector<std::uint8_t> any = {1, 2, 3};
  EXPECT_EQ(Eval(e, any).bits, 255u);
  EXPECT_EQ(Eval(e, any).width, 32u);
}

TEST(Eval, ReadIsIdentity) {
  std::vector<std::uint8_t> in(8, 0);
  in[5] = 0x7F;
  BitVec v = Eval(R(5), in);
  EXPECT_EQ(v.bits, 0x7Fu);
  EXPECT_EQ(v.width, 8u);
}

TEST(Eval, LittleEndianField) {
  std::vector<std::uint8_t> in = {0xAD, 0xDE, 0, 0};
  ByteExpr e = ByteExpr::Binary(Op::kOr, ByteExpr::Shl(ByteExpr::ZeroExtend(32, R(1)), C(8, 32)),
                                ByteExpr::ZeroExtend(32, R(0)));
  EXPECT_EQ(Eval(e, in).bits, 0xDEADu);
}

TEST(Eval, ReadPastEndReportsOffset) {
  std::vector<std::uint8_t> in = {1, 2};
  try {
    Eval(R(7), in);
    FAIL();
  } catch (const TraceEvalError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(Eval, ShiftsSaturate) {
  std::vector<std::uint8_t> in = {0x80};
  ByteExpr x = ByteExpr::SignExtend(32, R(0));  // 0xFFFFFF80
  EXPECT_EQ(Eval(ByteExpr::Shl(x, C(40, 32)), in).bits, 0u);
  EXPECT_EQ(Eval(ByteExpr::LShr(x, C(32, 32)), in).bits, 0u);
  EXPECT_EQ(Eval(ByteExpr::AShr(x, C(99, 32)), in).bits, 0xFFFFFFFFu);
  EXPECT_EQ(Eval(ByteExpr::AShr(x, C(4, 32)), in).bits, 0xFFFFFFF8u);
}

TEST(Eval, ExtendAndExtract) {
  std::vector<std::uint8_t> in = {0xFE};
  EXPECT_EQ(Eval(ByteExpr::ZeroExtend(64, R(0)), in).bits, 0xFEu);
  EXPECT_EQ(Eval(ByteExpr::SignExtend(64, R(0)), in).bits, 0xFFFFFFFFFFFFFFFEu);
  ByteExpr wide = ByteExpr::SignExtend(128, R(0));
  EXPECT_EQ(Eval(wide, in).bits, ~u128{0} - 1);
  ByteExpr mid = ByteExpr::Extract(31, 16, ByteExpr::ZeroExtend(32, Le16(0)));
  EXPECT_EQ(mid.width(), 16u);
}

TEST(Schema, Widths) {
  EXPECT_TRUE(IsValidWidth(8));
  EXPECT_TRUE(IsValidWidth(128));
  EXPECT_FALSE(IsValidWidth(24));
  EXPECT_EQ(WidthFor(1), 8u);
  EXPECT_EQ(WidthFor(9), 16u);
  EXPECT_EQ(WidthFor(33), 64u);
  EXPECT_EQ(WidthFor(65), 128u);
  EXPECT_EQ(ByteExpr::Extract(40, 0, ByteExpr::ZeroExtend(64, R(0))).width(), 64u);
}

TEST(Schema, RejectsMalformedNodes) {
  EXPECT_THROW(ByteExpr::Const(0, 24), SchemaError);
  EXPECT_THROW(ByteExpr::Extract(8, 0, R(0)), SchemaError);
  EXPECT_THROW(ByteExpr::Extract(2, 3, R(0)), SchemaError);
  EXPECT_THROW(ByteExpr::Binary(Op::kAdd, R(0), C(1, 16)), SchemaError);
  EXPECT_THROW(ByteExpr::ZeroExtend(8, ByteExpr::ZeroExtend(16, R(0))), SchemaError);
}

TEST(Sexpr, RoundTrip) {
  ByteExpr e = Green555(0x188);
  std::string text = ToSexpr(e);
  EXPECT_EQ(ParseSexpr(text), e);
  EXPECT_EQ(ToSexpr(ParseSexpr(text)), text);
  EXPECT_THROW(ParseSexpr("(add (read 1)"), SchemaError);
}

TEST(Abstract, ReadsShareShape) {
  ExprShape a = AbstractExpr(R(44));
  ExprShape b = AbstractExpr(R(46));
  EXPECT_EQ(a.key, b.key);
  EXPECT_EQ(a.offsets, std::vector<std::uint64_t>{44});
  EXPECT_EQ(b.offsets, std::vector<std::uint64_t>{46});
}

TEST(Abstract, GreenChannelAtTwoOffsets) {
  ExprShape a = AbstractExpr(Green555(0x188));
  ExprShape b = AbstractExpr(Green555(0x18A));
  EXPECT_EQ(a.key, b.key);
  EXPECT_EQ(a.offsets, (std::vector<std::uint64_t>{0x188, 0x189}));
  EXPECT_EQ(b.offsets, (std::vector<std::uint64_t>{0x18A, 0x18B}));
  EXPECT_EQ(Substitute(a.pattern, b.offsets), Green555(0x18A));
}

TEST(Abstract, ConstantsArePartOfTheShape) {
  ExprShape a = AbstractExpr(ByteExpr::Binary(Op::kAdd, R(3), C(1, 8)));
  ExprShape b = AbstractExpr(ByteExpr::Binary(Op::kAdd, R(3), C(2, 8)));
  EXPECT_NE(a.key, b.key);
}

TEST(Trace, ParsesOneEntry) {
  TraceLog log = ParseTrace("IN f 10\nOUT a 0 := (read 3)\n");
  EXPECT_EQ(log.file_id, "f");
  EXPECT_EQ(log.input_length, 10u);
  ASSERT_EQ(log.entries.size(), 1u);
  EXPECT_EQ(log.entries[0].expr, R(3));
}

TEST(Trace, DuplicateOutputIsAnError) {
  EXPECT_THROW(ParseTrace("IN f 10\nOUT a 0 := (read 3)\nOUT a 0 := (read 4)\n"), TraceParseError);
}

TEST(Trace, ValidateCatchesGapsAndOutOfRangeReads) {
  TraceLog gap = ParseTrace("IN f 10\nOUT a 0 := (read 3)\nOUT a 2 := (read 4)\n");
  EXPECT_THROW(ValidateTrace(gap), SchemaError);
  TraceLog far = ParseTrace("IN f 4\nOUT a 0 := (read 9)\n");
  EXPECT_THROW(ValidateTrace(far), SchemaError);
}

TEST(Trace, TracedBitmapRoundTrips) {
  CorpusEntry e = testing::EntryFor(testing::Bmp("bmp24", 2, 2), 3);
  TracedOutput t = TracedParse(e.bytes, e.name);
  TraceLog back = ParseTrace(SerializeTrace(t.log));
  ASSERT_EQ(back.entries.size(), 12u);
  for (const TraceEntry& te : back.entries) EXPECT_EQ(te.array, "pixels");
  EXPECT_NO_THROW(ValidateTrace(back));
  EXPECT_EQ(ReplayTrace(back, e.bytes), *e.expected);
}

}  // namespace
}  // namespace parsegen
