#include "parsegen/expr.h"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <sstream>

namespace parsegen {

namespace {

ExprNode MakeNode(Op op, unsigned width) {
  ExprNode n;
  n.op = op;
  n.width = width;
  return n;
}

void RequireWidth(unsigned width, std::string_view what) {
  if (!IsValidWidth(width)) {
    throw SchemaError(std::string(what) + ": illegal width " +
                      std::to_string(width));
  }
}

void RequireValid(const ByteExpr& e, std::string_view what) {
  if (!e.valid()) throw SchemaError(std::string(what) + ": missing operand");
}

}  // namespace

std::string_view OpName(Op op) {
  switch (op) {
    case Op::kRead: return "read";
    case Op::kConst: return "const";
    case Op::kZeroExtend: return "zext";
    case Op::kSignExtend: return "sext";
    case Op::kExtract: return "extract";
    case Op::kShl: return "shl";
    case Op::kLShr: return "lshr";
    case Op::kAShr: return "ashr";
    case Op::kAnd: return "and";
    case Op::kOr: return "or";
    case Op::kXor: return "xor";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
  }
  return "?";
}

bool IsValidWidth(unsigned width) {
  return width == 8 || width == 16 || width == 32 || width == 64 ||
         width == 128;
}

unsigned WidthFor(unsigned bits) {
  for (unsigned w : {8u, 16u, 32u, 64u, 128u}) {
    if (bits <= w) return w;
  }
  throw SchemaError("no width holds " + std::to_string(bits) + " bits");
}

u128 WidthMask(unsigned width) {
  if (width >= 128) return ~static_cast<u128>(0);
  return (static_cast<u128>(1) << width) - 1;
}

TraceEvalError::TraceEvalError(std::uint64_t offset)
    : std::runtime_error("read of input offset " + std::to_string(offset) +
                         " is past the end of the input"),
      offset_(offset) {}

__int128 BitVec::as_signed() const {
  if (width >= 128) return static_cast<__int128>(bits);
  u128 sign = static_cast<u128>(1) << (width - 1);
  if (bits & sign) return static_cast<__int128>(bits | ~WidthMask(width));
  return static_cast<__int128>(bits);
}

ByteExpr ByteExpr::Read(std::uint64_t offset) {
  ExprNode n = MakeNode(Op::kRead, 8);
  n.offset = offset;
  return ByteExpr(std::make_shared<const ExprNode>(std::move(n)));
}

ByteExpr ByteExpr::Const(u128 value, unsigned width) {
  RequireWidth(width, "const");
  if ((value & ~WidthMask(width)) != 0) {
    throw SchemaError("const " + U128ToString(value) + " does not fit in " +
                      std::to_string(width) + " bits");
  }
  ExprNode n = MakeNode(Op::kConst, width);
  n.value = value;
  return ByteExpr(std::make_shared<const ExprNode>(std::move(n)));
}

ByteExpr ByteExpr::ZeroExtend(unsigned to_width, ByteExpr child) {
  RequireValid(child, "zext");
  RequireWidth(to_width, "zext");
  if (to_width < child.width()) {
    throw SchemaError("zext to " + std::to_string(to_width) +
                      " narrows a " + std::to_string(child.width()) +
                      "-bit operand");
  }
  ExprNode n = MakeNode(Op::kZeroExtend, to_width);
  n.a = std::move(child);
  return ByteExpr(std::make_shared<const ExprNode>(std::move(n)));
}

ByteExpr ByteExpr::SignExtend(unsigned to_width, ByteExpr child) {
  RequireValid(child, "sext");
  RequireWidth(to_width, "sext");
  if (to_width < child.width()) {
    throw SchemaError("sext to " + std::to_string(to_width) +
                      " narrows a " + std::to_string(child.width()) +
                      "-bit operand");
  }
  ExprNode n = MakeNode(Op::kSignExtend, to_width);
  n.a = std::move(child);
  return ByteExpr(std::make_shared<const ExprNode>(std::move(n)));
}

ByteExpr ByteExpr::Extract(unsigned hi, unsigned lo, ByteExpr child) {
  RequireValid(child, "extract");
  if (hi < lo || hi >= child.width()) {
    throw SchemaError("extract " + std::to_string(hi) + " " +
                      std::to_string(lo) + " out of range for a " +
                      std::to_string(child.width()) + "-bit operand");
  }
  ExprNode n = MakeNode(Op::kExtract, WidthFor(hi - lo + 1));
  n.hi = hi;
  n.lo = lo;
  n.a = std::move(child);
  return ByteExpr(std::make_shared<const ExprNode>(std::move(n)));
}

namespace {

ByteExpr MakeShift(Op op, ByteExpr child, ByteExpr amount) {
  RequireValid(child, OpName(op));
  RequireValid(amount, OpName(op));
  if (amount.op() != Op::kConst) {
    throw SchemaError(std::string(OpName(op)) +
                      ": shift amount must be a constant");
  }
  if (amount.width() != child.width()) {
    throw SchemaError(std::string(OpName(op)) + ": operand widths differ");
  }
  return ByteExpr::Binary(op, std::move(child), std::move(amount));
}

}  // namespace

ByteExpr ByteExpr::Shl(ByteExpr child, ByteExpr amount) {
  return MakeShift(Op::kShl, std::move(child), std::move(amount));
}
ByteExpr ByteExpr::LShr(ByteExpr child, ByteExpr amount) {
  return MakeShift(Op::kLShr, std::move(child), std::move(amount));
}
ByteExpr ByteExpr::AShr(ByteExpr child, ByteExpr amount) {
  return MakeShift(Op::kAShr, std::move(child), std::move(amount));
}

ByteExpr ByteExpr::Binary(Op op, ByteExpr lhs, ByteExpr rhs) {
  switch (op) {
    case Op::kShl: case Op::kLShr: case Op::kAShr:
      if (rhs.valid() && rhs.op() != Op::kConst) {
        throw SchemaError(std::string(OpName(op)) +
                          ": shift amount must be a constant");
      }
      break;
    case Op::kAnd: case Op::kOr: case Op::kXor:
    case Op::kAdd: case Op::kSub: case Op::kMul:
      break;
    default:
      throw SchemaError(std::string(OpName(op)) + " is not a binary operator");
  }
  RequireValid(lhs, OpName(op));
  RequireValid(rhs, OpName(op));
  if (lhs.width() != rhs.width()) {
    throw SchemaError(std::string(OpName(op)) + ": operand widths differ (" +
                      std::to_string(lhs.width()) + " vs " +
                      std::to_string(rhs.width()) + ")");
  }
  ExprNode n = MakeNode(op, lhs.width());
  n.a = std::move(lhs);
  n.b = std::move(rhs);
  return ByteExpr(std::make_shared<const ExprNode>(std::move(n)));
}

Op ByteExpr::op() const { return node_->op; }
unsigned ByteExpr::width() const { return node_->width; }
std::uint64_t ByteExpr::offset() const { return node_->offset; }
u128 ByteExpr::value() const { return node_->value; }
unsigned ByteExpr::hi() const { return node_->hi; }
unsigned ByteExpr::lo() const { return node_->lo; }
const ByteExpr& ByteExpr::lhs() const { return node_->a; }
const ByteExpr& ByteExpr::rhs() const { return node_->b; }

bool operator==(const ByteExpr& x, const ByteExpr& y) {
  if (x.node_ == y.node_) return true;
  if (!x.node_ || !y.node_) return false;
  const ExprNode& a = *x.node_;
  const ExprNode& b = *y.node_;
  if (a.op != b.op || a.width != b.width) return false;
  switch (a.op) {
    case Op::kRead: return a.offset == b.offset;
    case Op::kConst: return a.value == b.value;
    case Op::kExtract:
      return a.hi == b.hi && a.lo == b.lo && a.a == b.a;
    case Op::kZeroExtend:
    case Op::kSignExtend:
      return a.a == b.a;
    default:
      return a.a == b.a && a.b == b.b;
  }
}

BitVec ApplyUnary(const ExprNode& n, const BitVec& c) {
  switch (n.op) {
    case Op::kZeroExtend:
      return BitVec{c.bits, n.width};
    case Op::kSignExtend:
      return BitVec{static_cast<u128>(c.as_signed()) & WidthMask(n.width),
                    n.width};
    case Op::kExtract:
      return BitVec{(c.bits >> n.lo) & WidthMask(n.hi - n.lo + 1), n.width};
    default:
      throw SchemaError("not a unary operator");
  }
}

BitVec ApplyBinary(Op op, const BitVec& l, const BitVec& r) {
  const unsigned w = l.width;
  const u128 mask = WidthMask(w);
  switch (op) {
    case Op::kShl:
      if (r.bits >= w) return BitVec{0, w};
      return BitVec{(l.bits << static_cast<unsigned>(r.bits)) & mask, w};
    case Op::kLShr:
      if (r.bits >= w) return BitVec{0, w};
      return BitVec{l.bits >> static_cast<unsigned>(r.bits), w};
    case Op::kAShr: {
      __int128 s = l.as_signed();
      unsigned k = r.bits >= w ? w - 1 : static_cast<unsigned>(r.bits);
      return BitVec{static_cast<u128>(s >> k) & mask, w};
    }
    case Op::kAnd: return BitVec{l.bits & r.bits, w};
    case Op::kOr: return BitVec{l.bits | r.bits, w};
    case Op::kXor: return BitVec{l.bits ^ r.bits, w};
    case Op::kAdd: return BitVec{(l.bits + r.bits) & mask, w};
    case Op::kSub: return BitVec{(l.bits - r.bits) & mask, w};
    case Op::kMul: return BitVec{(l.bits * r.bits) & mask, w};
    default:
      throw SchemaError("not a binary operator");
  }
}

BitVec Eval(const ByteExpr& expr, std::span<const std::uint8_t> input) {
  return EvalPattern(expr, [&](std::uint64_t offset) -> std::uint8_t {
    if (offset >= input.size()) throw TraceEvalError(offset);
    return input[offset];
  });
}

std::string U128ToString(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

namespace {

void WriteSexpr(const ByteExpr& e, bool placeholders, std::string& out) {
  const ExprNode& n = *e.node();
  out.push_back('(');
  out.append(OpName(n.op));
  switch (n.op) {
    case Op::kRead:
      out.append(placeholders ? " $" : " ");
      out.append(std::to_string(n.offset));
      break;
    case Op::kConst:
      out.push_back(' ');
      out.append(U128ToString(n.value));
      out.push_back(' ');
      out.append(std::to_string(n.width));
      break;
    case Op::kZeroExtend:
    case Op::kSignExtend:
      out.push_back(' ');
      out.append(std::to_string(n.width));
      out.push_back(' ');
      WriteSexpr(n.a, placeholders, out);
      break;
    case Op::kExtract:
      out.push_back(' ');
      out.append(std::to_string(n.hi));
      out.push_back(' ');
      out.append(std::to_string(n.lo));
      out.push_back(' ');
      WriteSexpr(n.a, placeholders, out);
      break;
    default:
      out.push_back(' ');
      WriteSexpr(n.a, placeholders, out);
      out.push_back(' ');
      WriteSexpr(n.b, placeholders, out);
      break;
  }
  out.push_back(')');
}

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  ByteExpr ParseAll() {
    ByteExpr e = ParseExpr();
    SkipSpace();
    if (pos_ != text_.size()) Fail("trailing characters");
    return e;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw SchemaError("s-expression: " + what + " at column " +
                      std::to_string(pos_ + 1));
  }

  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  void Expect(char c) {
    SkipSpace();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      Fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  std::string_view Word() {
    SkipSpace();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) Fail("expected a token");
    return text_.substr(start, pos_ - start);
  }

  u128 Number() {
    std::string_view w = Word();
    if (!w.empty() && w.front() == '$') w.remove_prefix(1);
    if (w.empty()) Fail("expected a number");
    u128 v = 0;
    for (char c : w) {
      if (c < '0' || c > '9') Fail("expected a number");
      u128 next = v * 10 + static_cast<unsigned>(c - '0');
      if (next / 10 != v) Fail("number overflows 128 bits");
      v = next;
    }
    return v;
  }

  unsigned SmallNumber() {
    u128 v = Number();
    if (v > 1024) Fail("number too large");
    return static_cast<unsigned>(v);
  }

  ByteExpr ParseExpr() {
    Expect('(');
    std::string_view kw = Word();
    ByteExpr result;
    if (kw == "read") {
      u128 off = Number();
      if (off > std::numeric_limits<std::uint64_t>::max()) Fail("offset too large");
      result = ByteExpr::Read(static_cast<std::uint64_t>(off));
    } else if (kw == "const") {
      u128 v = Number();
      unsigned w = SmallNumber();
      result = ByteExpr::Const(v, w);
    } else if (kw == "zext" || kw == "sext") {
      unsigned w = SmallNumber();
      ByteExpr c = ParseExpr();
      result = kw == "zext" ? ByteExpr::ZeroExtend(w, c)
                            : ByteExpr::SignExtend(w, c);
    } else if (kw == "extract") {
      unsigned hi = SmallNumber();
      unsigned lo = SmallNumber();
      result = ByteExpr::Extract(hi, lo, ParseExpr());
    } else {
      static const std::map<std::string_view, Op> kBinary = {
          {"shl", Op::kShl}, {"lshr", Op::kLShr}, {"ashr", Op::kAShr},
          {"and", Op::kAnd}, {"or", Op::kOr},     {"xor", Op::kXor},
          {"add", Op::kAdd}, {"sub", Op::kSub},   {"mul", Op::kMul}};
      auto it = kBinary.find(kw);
      if (it == kBinary.end()) Fail("unknown operator '" + std::string(kw) + "'");
      ByteExpr l = ParseExpr();
      ByteExpr r = ParseExpr();
      result = ByteExpr::Binary(it->second, l, r);
    }
    Expect(')');
    return result;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Smallest offset read anywhere in `e`, or UINT64_MAX when it reads nothing.
std::uint64_t MinOffset(const ByteExpr& e) {
  const ExprNode& n = *e.node();
  switch (n.op) {
    case Op::kRead: return n.offset;
    case Op::kConst: return std::numeric_limits<std::uint64_t>::max();
    case Op::kZeroExtend: case Op::kSignExtend: case Op::kExtract:
      return MinOffset(n.a);
    default:
      return std::min(MinOffset(n.a), MinOffset(n.b));
  }
}

void CollectOr(const ByteExpr& e, unsigned width, std::vector<ByteExpr>& out) {
  if (e.op() == Op::kOr && e.width() == width) {
    CollectOr(e.lhs(), width, out);
    CollectOr(e.rhs(), width, out);
  } else {
    out.push_back(Canonicalize(e));
  }
}

ByteExpr Rebuild(const ByteExpr& e, const ByteExpr& a, const ByteExpr& b) {
  switch (e.op()) {
    case Op::kZeroExtend: return ByteExpr::ZeroExtend(e.width(), a);
    case Op::kSignExtend: return ByteExpr::SignExtend(e.width(), a);
    case Op::kExtract: return ByteExpr::Extract(e.hi(), e.lo(), a);
    default: return ByteExpr::Binary(e.op(), a, b);
  }
}

void CollectOffsets(const ByteExpr& e, std::map<std::uint64_t, std::uint64_t>& index,
                    std::vector<std::uint64_t>& order) {
  const ExprNode& n = *e.node();
  switch (n.op) {
    case Op::kRead:
      if (index.emplace(n.offset, order.size()).second) order.push_back(n.offset);
      return;
    case Op::kConst:
      return;
    case Op::kZeroExtend: case Op::kSignExtend: case Op::kExtract:
      CollectOffsets(n.a, index, order);
      return;
    default:
      CollectOffsets(n.a, index, order);
      CollectOffsets(n.b, index, order);
  }
}

template <typename MapFn>
ByteExpr MapReads(const ByteExpr& e, MapFn&& fn) {
  const ExprNode& n = *e.node();
  switch (n.op) {
    case Op::kRead: return ByteExpr::Read(fn(n.offset));
    case Op::kConst: return e;
    case Op::kZeroExtend: case Op::kSignExtend: case Op::kExtract:
      return Rebuild(e, MapReads(n.a, fn), ByteExpr());
    default:
      return Rebuild(e, MapReads(n.a, fn), MapReads(n.b, fn));
  }
}

std::size_t MaxPlaceholder(const ByteExpr& e) {
  const ExprNode& n = *e.node();
  switch (n.op) {
    case Op::kRead: return static_cast<std::size_t>(n.offset) + 1;
    case Op::kConst: return 0;
    case Op::kZeroExtend: case Op::kSignExtend: case Op::kExtract:
      return MaxPlaceholder(n.a);
    default:
      return std::max(MaxPlaceholder(n.a), MaxPlaceholder(n.b));
  }
}

}  // namespace

std::string ToSexpr(const ByteExpr& expr) {
  std::string out;
  WriteSexpr(expr, false, out);
  return out;
}

std::string PatternKey(const ByteExpr& pattern) {
  std::string out;
  WriteSexpr(pattern, true, out);
  return out;
}

ByteExpr ParseSexpr(std::string_view text) {
  return SexprParser(text).ParseAll();
}

ByteExpr Canonicalize(const ByteExpr& expr) {
  const ExprNode& n = *expr.node();
  switch (n.op) {
    case Op::kRead:
    case Op::kConst:
      return expr;
    case Op::kOr: {
      std::vector<ByteExpr> operands;
      CollectOr(expr, n.width, operands);
      std::vector<std::pair<std::uint64_t, std::string>> keys;
      keys.reserve(operands.size());
      for (const ByteExpr& o : operands) keys.emplace_back(MinOffset(o), ToSexpr(o));
      std::vector<std::size_t> order(operands.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
      ByteExpr acc = operands[order[0]];
      for (std::size_t i = 1; i < order.size(); ++i) {
        acc = ByteExpr::Binary(Op::kOr, acc, operands[order[i]]);
      }
      return acc;
    }
    case Op::kZeroExtend: case Op::kSignExtend: case Op::kExtract:
      return Rebuild(expr, Canonicalize(n.a), ByteExpr());
    default:
      return Rebuild(expr, Canonicalize(n.a), Canonicalize(n.b));
  }
}

ExprShape AbstractExpr(const ByteExpr& expr) {
  ExprShape shape;
  ByteExpr canon = Canonicalize(expr);
  std::map<std::uint64_t, std::uint64_t> index;
  CollectOffsets(canon, index, shape.offsets);
  shape.pattern = MapReads(canon, [&](std::uint64_t off) { return index.at(off); });
  shape.key = PatternKey(shape.pattern);
  return shape;
}

ByteExpr Substitute(const ByteExpr& pattern,
                    std::span<const std::uint64_t> offsets) {
  return MapReads(pattern, [&](std::uint64_t placeholder) {
    if (placeholder >= offsets.size()) {
      throw SchemaError("placeholder $" + std::to_string(placeholder) +
                        " has no offset");
    }
    return offsets[placeholder];
  });
}

std::size_t PlaceholderCount(const ByteExpr& pattern) {
  return MaxPlaceholder(pattern);
}

}  // namespace parsegen
