// Width-tagged bit-vector expressions over input-file bytes.
//
// An expression describes how one output byte is computed from the bytes of
// the input file: reads, extensions, shifts, masks and modular arithmetic,
// with every node carrying a result width of 8, 16, 32, 64 or 128 bits.

#ifndef PARSEGEN_EXPR_H_
#define PARSEGEN_EXPR_H_

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parsegen {

using u128 = unsigned __int128;

enum class Op : std::uint8_t {
  kRead,
  kConst,
  kZeroExtend,
  kSignExtend,
  kExtract,
  kShl,
  kLShr,
  kAShr,
  kAnd,
  kOr,
  kXor,
  kAdd,
  kSub,
  kMul,
};

inline constexpr Op kAllOps[] = {
    Op::kRead, Op::kConst, Op::kZeroExtend, Op::kSignExtend, Op::kExtract,
    Op::kShl,  Op::kLShr,  Op::kAShr,       Op::kAnd,        Op::kOr,
    Op::kXor,  Op::kAdd,   Op::kSub,        Op::kMul,
};

// Keyword used for the node kind in the s-expression syntax.
std::string_view OpName(Op op);

bool IsValidWidth(unsigned width);
// Smallest legal width able to hold `bits` bits.
unsigned WidthFor(unsigned bits);
u128 WidthMask(unsigned width);

// Violations of the width algebra or of the trace schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A read outside the input while evaluating an expression.
class TraceEvalError : public std::runtime_error {
 public:
  explicit TraceEvalError(std::uint64_t offset);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

struct BitVec {
  u128 bits = 0;
  unsigned width = 8;

  std::uint64_t low64() const { return static_cast<std::uint64_t>(bits); }
  std::uint8_t low8() const { return static_cast<std::uint8_t>(bits); }
  // Two's-complement interpretation, sign-extended to 128 bits.
  __int128 as_signed() const;
  friend bool operator==(const BitVec&, const BitVec&) = default;
};

struct ExprNode;

// Immutable, cheaply copyable handle to an expression tree. Subtrees may be
// shared between expressions.
class ByteExpr {
 public:
  ByteExpr() = default;

  static ByteExpr Read(std::uint64_t offset);
  static ByteExpr Const(u128 value, unsigned width);
  static ByteExpr ZeroExtend(unsigned to_width, ByteExpr child);
  static ByteExpr SignExtend(unsigned to_width, ByteExpr child);
  static ByteExpr Extract(unsigned hi, unsigned lo, ByteExpr child);
  // Shift amounts must be constants of the child's width.
  static ByteExpr Shl(ByteExpr child, ByteExpr amount);
  static ByteExpr LShr(ByteExpr child, ByteExpr amount);
  static ByteExpr AShr(ByteExpr child, ByteExpr amount);
  static ByteExpr Binary(Op op, ByteExpr lhs, ByteExpr rhs);

  bool valid() const { return node_ != nullptr; }
  Op op() const;
  unsigned width() const;
  std::uint64_t offset() const;  // kRead
  u128 value() const;            // kConst
  unsigned hi() const;           // kExtract
  unsigned lo() const;           // kExtract
  const ByteExpr& lhs() const;   // unary child or left operand
  const ByteExpr& rhs() const;   // right operand or shift amount

  const ExprNode* node() const { return node_.get(); }

  friend bool operator==(const ByteExpr& a, const ByteExpr& b);

 private:
  explicit ByteExpr(std::shared_ptr<const ExprNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Op op;
  unsigned width;
  std::uint64_t offset = 0;
  u128 value = 0;
  unsigned hi = 0;
  unsigned lo = 0;
  ByteExpr a;
  ByteExpr b;
};

// Evaluates `expr` with two's-complement fixed-width semantics. Throws
// TraceEvalError naming the first out-of-range read.
BitVec Eval(const ByteExpr& expr, std::span<const std::uint8_t> input);

// Evaluates a shape pattern whose kRead offsets are placeholder indices;
// `read(placeholder)` supplies the byte for each placeholder.
template <typename ReadFn>
BitVec EvalPattern(const ByteExpr& expr, ReadFn&& read);

// Applies one operator to already-evaluated operands.
BitVec ApplyUnary(const ExprNode& node, const BitVec& child);
BitVec ApplyBinary(Op op, const BitVec& lhs, const BitVec& rhs);

std::string ToSexpr(const ByteExpr& expr);
ByteExpr ParseSexpr(std::string_view text);

// Flattens nested same-width Or chains and orders the operands by the
// smallest input offset they read.
ByteExpr Canonicalize(const ByteExpr& expr);

// A canonical expression with its reads replaced by placeholders $0, $1, ...
// numbered by first occurrence in left-to-right order.
struct ExprShape {
  std::string key;
  ByteExpr pattern;  // kRead offsets hold placeholder indices
  std::vector<std::uint64_t> offsets;
};

ExprShape AbstractExpr(const ByteExpr& expr);
ByteExpr Substitute(const ByteExpr& pattern,
                    std::span<const std::uint64_t> offsets);
// Serialization of a pattern with `$k` placeholders; equals ExprShape::key.
std::string PatternKey(const ByteExpr& pattern);
std::size_t PlaceholderCount(const ByteExpr& pattern);

std::string U128ToString(u128 v);

template <typename ReadFn>
BitVec EvalPattern(const ByteExpr& expr, ReadFn&& read) {
  const ExprNode& n = *expr.node();
  switch (n.op) {
    case Op::kRead:
      return BitVec{static_cast<u128>(read(n.offset)), 8};
    case Op::kConst:
      return BitVec{n.value, n.width};
    case Op::kZeroExtend:
    case Op::kSignExtend:
    case Op::kExtract:
      return ApplyUnary(n, EvalPattern(n.a, read));
    default: {
      BitVec l = EvalPattern(n.a, read);
      BitVec r = EvalPattern(n.b, read);
      return ApplyBinary(n.op, l, r);
    }
  }
}

}  // namespace parsegen

#endif  // PARSEGEN_EXPR_H_
