#include "parsegen/emit.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "parsegen/interp.h"
#include "parsegen/serialize.h"

namespace parsegen {

namespace {

constexpr const char* kBegin = "/* BEGIN SAFETY HELPERS */";
constexpr const char* kEnd = "/* END SAFETY HELPERS */";

constexpr const char* kHelpers = R"C(#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define PG_MAX_OUTPUT ((int64_t)1 << 27)
#define PG_MAX_RECORDS ((int64_t)1 << 26)

typedef struct { uint64_t lo, hi; } pg_u128;

typedef struct PgArray {
  const char* name;
  uint8_t* data;
  size_t size;
  size_t cap;
  int touched;
  struct PgArray* next;
} PgArray;

static FILE* pg_fp;
static int64_t pg_pos = -1;
static int64_t pg_size;
static int64_t pg_total_out;
static int64_t pg_total_records;

static inline void pg_dispatch(void);
static inline PgArray* pg_first_array(void);

static inline void pg_fail(int code, const char* what, int64_t value) {
  fprintf(stderr, "%s %lld\n", what, (long long)value);
  exit(code);
}

static inline void pg_reject(void) {
  fprintf(stderr, "no parser for this input\n");
  exit(6);
}

/* Bounded read of n bytes at offset; reseeks only when the cursor moved. */
static inline void readBytesFromFP(uint8_t* dst, int64_t offset, int64_t n) {
  if (offset < 0 || n < 0 || offset > pg_size - n) pg_fail(3, "Unable to read input at offset", offset);
  if (pg_pos != offset && fseek(pg_fp, (long)offset, SEEK_SET) != 0) {
    pg_fail(3, "Unable to fseek to offset", offset);
  }
  if (fread(dst, 1, (size_t)n, pg_fp) != (size_t)n) pg_fail(3, "Unable to read input at offset", offset);
  pg_pos = offset + n;
}

static inline uint8_t pg_rd(int64_t offset) {
  uint8_t b;
  readBytesFromFP(&b, offset, 1);
  return b;
}

static inline int pg_peek(int64_t offset) {
  if (offset < 0 || offset >= pg_size) return -1;
  return pg_rd(offset);
}

/* Grows the array until index fits. */
static inline void writeArray(PgArray* a, int64_t index, uint8_t value) {
  if (index < 0) pg_fail(4, "Invalid index", index);
  if (index >= PG_MAX_OUTPUT) pg_fail(5, "output size limit exceeded at index", index);
  if ((size_t)index >= a->cap) {
    size_t newSize = a->cap;
    uint8_t* grown;
    while (newSize <= (size_t)index) newSize = (newSize + 1) * 2;
    grown = (uint8_t*)realloc(a->data, newSize);
    if (!grown) pg_fail(5, "out of memory at index", index);
    memset(grown + a->cap, 0, newSize - a->cap);
    a->data = grown;
    a->cap = newSize;
  }
  if ((size_t)index >= a->size) {
    pg_total_out += index + 1 - (int64_t)a->size;
    if (pg_total_out > PG_MAX_OUTPUT) pg_fail(5, "output size limit exceeded at index", index);
    a->size = (size_t)index + 1;
  }
  a->data[index] = value;
  a->touched = 1;
}

static inline int64_t pg_add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) pg_fail(5, "arithmetic overflow", a);
  return r;
}

static inline int64_t pg_mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) pg_fail(5, "arithmetic overflow", a);
  return r;
}

static inline int64_t pg_neg(int64_t a) {
  if (a == INT64_MIN) pg_fail(5, "arithmetic overflow", a);
  return -a;
}

static inline int64_t pg_pad4(int64_t x) {
  if (x >= 0) return pg_mul(pg_add(x, 3) / 4, 4);
  return pg_neg(pg_mul(pg_add(pg_neg(x), 3) / 4, 4));
}

static inline int64_t pg_field(int64_t offset, int bytes, int is_signed) {
  uint8_t b[8];
  uint64_t v = 0;
  int i;
  readBytesFromFP(b, offset, bytes);
  for (i = 0; i < bytes; ++i) v |= (uint64_t)b[i] << (8 * i);
  if (is_signed) {
    if (bytes < 8) {
      uint64_t sign = (uint64_t)1 << (8 * bytes - 1);
      if (v & sign) v |= ~((sign << 1) - 1);
    }
    return (int64_t)v;
  }
  if (v > (uint64_t)INT64_MAX) pg_fail(5, "unsigned field too large at offset", offset);
  return (int64_t)v;
}

static inline int64_t pg_count(int64_t bound, int64_t step) {
  if (bound <= 0) return 0;
  return bound / step + (bound % step != 0);
}

static inline int64_t pg_records(int64_t records, int64_t count) {
  records = pg_mul(records, count);
  if (records > PG_MAX_RECORDS) pg_fail(5, "loop iteration limit exceeded", records);
  return records;
}

static inline void pg_add_records(int64_t records) {
  pg_total_records = pg_add(pg_total_records, records);
  if (pg_total_records > PG_MAX_RECORDS) pg_fail(5, "loop iteration limit exceeded", records);
}

/* Largest input offset contribution of one loop level. */
static inline int64_t pg_extent(int64_t bound, int64_t step, int64_t factor, int64_t addend, int* empty) {
  int64_t count, first, last;
  if (bound <= 0) {
    *empty = 1;
    return 0;
  }
  count = pg_count(bound, step);
  first = pg_mul(addend, factor);
  last = pg_mul(pg_add(pg_mul(count - 1, step), addend), factor);
  return first > last ? first : last;
}

static inline pg_u128 pg_mk(uint64_t hi, uint64_t lo) {
  pg_u128 r;
  r.lo = lo;
  r.hi = hi;
  return r;
}
static inline pg_u128 pg_from64(uint64_t x) { return pg_mk(0, x); }
static inline pg_u128 pg_sext64(int64_t x) { return pg_mk(x < 0 ? ~(uint64_t)0 : 0, (uint64_t)x); }
static inline uint64_t pg_lo64(pg_u128 a) { return a.lo; }
static inline pg_u128 pg_and128(pg_u128 a, pg_u128 b) { return pg_mk(a.hi & b.hi, a.lo & b.lo); }
static inline pg_u128 pg_or128(pg_u128 a, pg_u128 b) { return pg_mk(a.hi | b.hi, a.lo | b.lo); }
static inline pg_u128 pg_xor128(pg_u128 a, pg_u128 b) { return pg_mk(a.hi ^ b.hi, a.lo ^ b.lo); }
static inline pg_u128 pg_add128(pg_u128 a, pg_u128 b) {
  uint64_t lo = a.lo + b.lo;
  return pg_mk(a.hi + b.hi + (lo < a.lo), lo);
}
static inline pg_u128 pg_sub128(pg_u128 a, pg_u128 b) {
  return pg_mk(a.hi - b.hi - (a.lo < b.lo), a.lo - b.lo);
}
static inline pg_u128 pg_mul128(pg_u128 a, pg_u128 b) {
  uint64_t a0 = a.lo & 0xffffffffu, a1 = a.lo >> 32, b0 = b.lo & 0xffffffffu, b1 = b.lo >> 32;
  uint64_t p00 = a0 * b0, p01 = a0 * b1, p10 = a1 * b0, p11 = a1 * b1;
  uint64_t mid = (p00 >> 32) + (p01 & 0xffffffffu) + (p10 & 0xffffffffu);
  uint64_t lo = (p00 & 0xffffffffu) | (mid << 32);
  uint64_t hi = p11 + (p01 >> 32) + (p10 >> 32) + (mid >> 32);
  hi += a.lo * b.hi + a.hi * b.lo;
  return pg_mk(hi, lo);
}
static inline pg_u128 pg_shl128(pg_u128 a, unsigned s) {
  if (s >= 128) return pg_mk(0, 0);
  if (s == 0) return a;
  if (s >= 64) return pg_mk(a.lo << (s - 64), 0);
  return pg_mk((a.hi << s) | (a.lo >> (64 - s)), a.lo << s);
}
static inline pg_u128 pg_lshr128(pg_u128 a, unsigned s) {
  if (s >= 128) return pg_mk(0, 0);
  if (s == 0) return a;
  if (s >= 64) return pg_mk(0, a.hi >> (s - 64));
  return pg_mk(a.hi >> s, (a.lo >> s) | (a.hi << (64 - s)));
}
static inline pg_u128 pg_ashr128(pg_u128 a, unsigned s) {
  uint64_t fill = (uint64_t)((int64_t)a.hi >> 63);
  if (s > 127) s = 127;
  if (s == 0) return a;
  if (s >= 64) return pg_mk(fill, (uint64_t)((int64_t)a.hi >> (s - 64)));
  return pg_mk((uint64_t)((int64_t)a.hi >> s), (a.lo >> s) | (a.hi << (64 - s)));
}

static inline int pg_main(int argc, char** argv) {
  FILE* out;
  FILE* idx;
  char* idx_path;
  PgArray* a;
  long long offset = 0;
  if (argc != 3) {
    fprintf(stderr, "usage: %s <input> <output>\n", argv[0]);
    return 2;
  }
  pg_fp = fopen(argv[1], "rb");
  if (!pg_fp) pg_fail(1, "Unable to open input", 0);
  if (fseek(pg_fp, 0, SEEK_END) != 0) pg_fail(3, "Unable to fseek to offset", 0);
  pg_size = ftell(pg_fp);
  if (pg_size < 0 || fseek(pg_fp, 0, SEEK_SET) != 0) pg_fail(3, "Unable to fseek to offset", 0);
  pg_pos = 0;
  pg_dispatch();
  out = fopen(argv[2], "wb");
  idx_path = (char*)malloc(strlen(argv[2]) + 5);
  if (!out || !idx_path) pg_fail(1, "Unable to open output", 0);
  strcpy(idx_path, argv[2]);
  strcat(idx_path, ".idx");
  idx = fopen(idx_path, "wb");
  if (!idx) pg_fail(1, "Unable to open output", 0);
  for (a = pg_first_array(); a; a = a->next) {
    if (!a->touched) continue;
    fprintf(idx, "%s %lld %lld\n", a->name, offset, (long long)a->size);
    if (a->size && fwrite(a->data, 1, a->size, out) != a->size) pg_fail(1, "Unable to write output", 0);
    offset += (long long)a->size;
  }
  fclose(out);
  fclose(idx);
  fclose(pg_fp);
  return 0;
}
)C";

std::string Hex(std::uint64_t v) {
  std::ostringstream s;
  s << "UINT64_C(0x" << std::hex << v << ")";
  return s.str();
}

std::string UType(unsigned w) { return "uint" + std::to_string(w) + "_t"; }
std::string SType(unsigned w) { return "int" + std::to_string(w) + "_t"; }

std::uint64_t LowMask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

struct Lowered {
  std::string code;
  unsigned width;
};

Lowered Lower(const ByteExpr& e) {
  const unsigned w = e.width();
  switch (e.op()) {
    case Op::kRead:
      return {"p" + std::to_string(e.offset()), 8};
    case Op::kConst: {
      u128 v = e.value();
      if (w <= 64) return {"((" + UType(w) + ")" + Hex(static_cast<std::uint64_t>(v)) + ")", w};
      return {"pg_mk(" + Hex(static_cast<std::uint64_t>(v >> 64)) + ", " +
                  Hex(static_cast<std::uint64_t>(v)) + ")",
              w};
    }
    case Op::kZeroExtend: {
      Lowered c = Lower(e.lhs());
      if (c.width == w) return c;
      if (w <= 64) return {"((" + UType(w) + ")(" + c.code + "))", w};
      return {"pg_from64((uint64_t)(" + c.code + "))", w};
    }
    case Op::kSignExtend: {
      Lowered c = Lower(e.lhs());
      if (c.width == w) return c;
      if (w <= 64) {
        return {"((" + UType(w) + ")(" + SType(w) + ")(" + SType(c.width) + ")(" + c.code + "))", w};
      }
      return {"pg_sext64((int64_t)(" + SType(c.width) + ")(" + c.code + "))", w};
    }
    case Op::kExtract: {
      Lowered c = Lower(e.lhs());
      const unsigned k = e.hi() - e.lo() + 1;
      const std::string lo = std::to_string(e.lo());
      if (c.width <= 64) {
        std::string shifted = "((uint64_t)(" + c.code + ") >> " + lo + ")";
        if (k < 64) shifted = "(" + shifted + " & " + Hex(LowMask(k)) + ")";
        return {"((" + UType(w) + ")" + shifted + ")", w};
      }
      std::string shifted = "pg_lshr128(" + c.code + ", " + lo + ")";
      if (w <= 64) {
        return {"((" + UType(w) + ")(pg_lo64(" + shifted + ") & " + Hex(LowMask(k)) + "))", w};
      }
      std::uint64_t hi_mask = k >= 128 ? ~std::uint64_t{0} : LowMask(k - 64);
      return {"pg_and128(" + shifted + ", pg_mk(" + Hex(hi_mask) + ", " + Hex(~std::uint64_t{0}) + "))",
              w};
    }
    case Op::kShl:
    case Op::kLShr:
    case Op::kAShr: {
      Lowered a = Lower(e.lhs());
      if (e.rhs().op() != Op::kConst) throw EmitError("shift amount must be a constant");
      u128 amount = e.rhs().value();
      if (w <= 64) {
        if (e.op() == Op::kAShr) {
          unsigned s = amount >= w ? w - 1 : static_cast<unsigned>(amount);
          return {"((" + UType(w) + ")((" + SType(w) + ")(" + a.code + ") >> " + std::to_string(s) + "))", w};
        }
        if (amount >= w) return {"((" + UType(w) + ")0)", w};
        const char* op = e.op() == Op::kShl ? " << " : " >> ";
        return {"((" + UType(w) + ")((uint64_t)(" + a.code + ")" + op +
                    std::to_string(static_cast<unsigned>(amount)) + "))",
                w};
      }
      unsigned s = amount >= 128 ? 128 : static_cast<unsigned>(amount);
      const char* fn = e.op() == Op::kShl ? "pg_shl128" : e.op() == Op::kLShr ? "pg_lshr128" : "pg_ashr128";
      return {std::string(fn) + "(" + a.code + ", " + std::to_string(s) + ")", w};
    }
    case Op::kAnd:
    case Op::kOr:
    case Op::kXor:
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul: {
      Lowered a = Lower(e.lhs());
      Lowered b = Lower(e.rhs());
      if (w <= 64) {
        const char* op = e.op() == Op::kAnd ? " & "
                         : e.op() == Op::kOr ? " | "
                         : e.op() == Op::kXor ? " ^ "
                         : e.op() == Op::kAdd ? " + "
                         : e.op() == Op::kSub ? " - "
                                              : " * ";
        return {"((" + UType(w) + ")((uint64_t)(" + a.code + ")" + op + "(uint64_t)(" + b.code + ")))", w};
      }
      const char* fn = e.op() == Op::kAnd ? "pg_and128"
                       : e.op() == Op::kOr ? "pg_or128"
                       : e.op() == Op::kXor ? "pg_xor128"
                       : e.op() == Op::kAdd ? "pg_add128"
                       : e.op() == Op::kSub ? "pg_sub128"
                                            : "pg_mul128";
      return {std::string(fn) + "(" + a.code + ", " + b.code + ")", w};
    }
  }
  throw EmitError("unknown expression node kind");
}

std::string CString(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\%03o", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::string Int(std::int64_t v) {
  if (v == INT64_MIN) return "INT64_MIN";
  return "INT64_C(" + std::to_string(v) + ")";
}

std::string DefExpr(const IrProgram& p, const Definition& d, std::size_t leaf) {
  (void)leaf;
  auto field = [](const FieldRef& f) {
    return "pg_field(" + std::to_string(f.offset) + ", " + std::to_string(f.bytes) + ", " +
           (f.is_signed ? "1" : "0") + ")";
  };
  auto finish = [&](std::string v) {
    if (d.scale != 1) v = "pg_mul(" + v + ", " + Int(d.scale) + ")";
    if (d.negate) v = "pg_neg(" + v + ")";
    return v;
  };
  switch (d.kind) {
    case Definition::Kind::kField:
      return finish(field(d.a));
    case Definition::Kind::kProduct:
      return finish("pg_mul(" + field(d.a) + ", " + field(d.b) + ")");
    case Definition::Kind::kAdjacency:
      return "pg_end_" + std::to_string(d.nest) + "()";
    case Definition::Kind::kRewrite:
      switch (d.rewrite) {
        case RewriteKind::kNegPlusOne: return "pg_add(pg_neg(" + d.x + "), 1)";
        case RewriteKind::kMul: return "pg_mul(" + d.x + ", " + d.y + ")";
        case RewriteKind::kNegMul: return "pg_neg(pg_mul(" + d.x + ", " + d.y + "))";
        case RewriteKind::kPad4Mul: return "pg_pad4(pg_mul(" + d.x + ", " + d.y + "))";
        case RewriteKind::kPad4NegMul: return "pg_pad4(pg_neg(pg_mul(" + d.x + ", " + d.y + ")))";
      }
  }
  (void)p;
  throw EmitError("unknown definition kind");
}

// Statement block computing the end of nest k into `target`.
std::string NestEndBlock(const IrProgram& p, std::size_t k, const std::string& target) {
  const LoopNest& n = p.nests[k];
  std::ostringstream s;
  bool any = false;
  std::int64_t max_delta = 0;
  for (const BodyStmt& b : n.body) {
    for (std::int64_t d : b.in_deltas) {
      max_delta = any ? std::max(max_delta, d) : d;
      any = true;
    }
  }
  s << "  {\n";
  s << "    int pg_empty = 0;\n";
  s << "    int64_t pg_e = pg_add(" << MinYSymbol(k) << ", " << Int(n.y0_delta) << ");\n";
  for (std::size_t l = 0; l < n.levels.size(); ++l) {
    const LoopLevel& lv = n.levels[l];
    s << "    pg_e = pg_add(pg_e, pg_extent(" << BoundSymbol(k, l) << ", " << Int(lv.step) << ", "
      << InFactorSymbol(k, l) << ", " << (lv.in_addend == 0 ? Int(0) : AddendSymbol(k, l))
      << ", &pg_empty));\n";
  }
  if (any) {
    s << "    " << target << " = pg_empty ? " << MinYSymbol(k) << " : pg_add(pg_e, "
      << Int(max_delta) << " + 1);\n";
  } else {
    s << "    " << target << " = " << MinYSymbol(k) << ";\n";
  }
  s << "  }\n";
  return s.str();
}

void EmitLeaf(std::ostringstream& out, const IrProgram& p, std::size_t leaf,
              const std::map<std::string, std::string>& array_vars) {
  const std::string prefix = "pg_leaf" + std::to_string(leaf);
  for (std::size_t i = 0; i < p.shapes.size(); ++i) {
    out << "static uint8_t " << prefix << "_shape" << i << "(";
    const std::size_t n = p.shapes[i].placeholders;
    if (n == 0) out << "void";
    for (std::size_t q = 0; q < n; ++q) out << (q ? ", " : "") << "uint8_t p" << q;
    Lowered l = Lower(p.shapes[i].pattern);
    out << ") {\n";
    for (std::size_t q = 0; q < n; ++q) out << "  (void)p" << q << ";\n";
    out << "  return (uint8_t)" << (l.width > 64 ? "pg_lo64(" + l.code + ")" : "(" + l.code + ")")
        << ";\n}\n\n";
  }
  out << "/* " << ParserSummary(p) << " */\n";
  out << "static void " << prefix << "(void) {\n";
  for (const auto& [name, value] : ConcreteEnv(p)) {
    out << "  int64_t " << name << " = " << Int(value) << ";\n";
  }
  for (const auto& [name, value] : ConcreteEnv(p)) out << "  (void)" << name << ";\n";
  for (const Definition& d : p.defs) {
    if (d.kind == Definition::Kind::kAdjacency) {
      if (d.nest >= p.nests.size()) throw EmitError("adjacency to a missing nest");
      out << NestEndBlock(p, d.nest, d.symbol);
    } else {
      out << "  " << d.symbol << " = " << DefExpr(p, d, leaf) << ";\n";
    }
  }
  for (std::size_t k = 0; k < p.nests.size(); ++k) {
    const LoopNest& n = p.nests[k];
    const std::size_t L = n.levels.size();
    out << "  /* " << n.array << " */\n  {\n";
    out << "    int64_t pg_ob = " << MinXSymbol(k) << ";\n";
    out << "    int64_t pg_ib = pg_add(" << MinYSymbol(k) << ", " << Int(n.y0_delta) << ");\n";
    out << "    int64_t pg_nrec = 1;\n";
    for (std::size_t l = 0; l < L; ++l) {
      const LoopLevel& lv = n.levels[l];
      const std::string s = std::to_string(l);
      out << "    int64_t pg_c" << s << " = pg_count(" << BoundSymbol(k, l) << ", " << Int(lv.step) << ");\n";
      out << "    int64_t pg_os" << s << " = pg_mul(" << OutFactorSymbol(k, l) << ", " << Int(lv.step) << ");\n";
      out << "    int64_t pg_is" << s << " = pg_mul(" << InFactorSymbol(k, l) << ", " << Int(lv.step) << ");\n";
      if (lv.in_addend != 0) {
        out << "    pg_ib = pg_add(pg_ib, pg_mul(" << AddendSymbol(k, l) << ", " << InFactorSymbol(k, l)
            << "));\n";
      }
      out << "    pg_nrec = pg_records(pg_nrec, pg_c" << s << ");\n";
    }
    out << "    if (pg_nrec > 0) {\n";
    out << "      pg_add_records(pg_nrec);\n";
    std::string indent = "      ";
    std::string outer_o = "pg_ob", outer_y = "pg_ib";
    for (std::size_t l = L; l-- > 0;) {
      const std::string s = std::to_string(l);
      out << indent << "int64_t pg_i" << s << ";\n";
      out << indent << "for (pg_i" << s << " = 0; pg_i" << s << " < pg_c" << s << "; ++pg_i" << s << ") {\n";
      indent += "  ";
      out << indent << "int64_t pg_o" << s << " = pg_add(" << outer_o << ", pg_mul(pg_i" << s << ", pg_os" << s
          << "));\n";
      out << indent << "int64_t pg_y" << s << " = pg_add(" << outer_y << ", pg_mul(pg_i" << s << ", pg_is" << s
          << "));\n";
      outer_o = "pg_o" + s;
      outer_y = "pg_y" + s;
    }
    for (const BodyStmt& b : n.body) {
      out << indent << "writeArray(&" << array_vars.at(n.array) << ", pg_add(" << outer_o << ", "
          << Int(b.out_delta) << "), " << prefix << "_shape" << b.shape << "(";
      for (std::size_t q = 0; q < b.in_deltas.size(); ++q) {
        out << (q ? ", " : "") << "pg_rd(pg_add(" << outer_y << ", " << Int(b.in_deltas[q]) << "))";
      }
      out << "));\n";
    }
    for (std::size_t l = 0; l < L; ++l) {
      indent.resize(indent.size() - 2);
      out << indent << "}\n";
    }
    out << "    }\n  }\n";
  }
  out << "}\n\n";
}

void EmitDispatch(std::ostringstream& out, const ParserTree& t,
                  const std::map<const ParserTree*, std::size_t>& leaf_ids, const std::string& indent,
                  bool partial) {
  if (t.is_leaf()) {
    if (t.parser) {
      out << indent << "pg_leaf" << leaf_ids.at(&t) << "();\n";
    } else {
      if (!partial) throw EmitError("tree has a leaf without a parser; emit with partial output enabled");
      out << indent << "pg_reject();\n";
    }
    return;
  }
  out << indent << "if (pg_peek(" << t.predicate->index << ") == " << static_cast<int>(t.predicate->value)
      << ") {\n";
  EmitDispatch(out, *t.sat, leaf_ids, indent + "  ", partial);
  out << indent << "} else {\n";
  EmitDispatch(out, *t.unsat, leaf_ids, indent + "  ", partial);
  out << indent << "}\n";
}

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

int RunCommand(const std::string& cmd) {
  int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

}  // namespace

std::string LowerExpr(const ByteExpr& expr) { return Lower(expr).code; }

std::string EmitSource(const ParserTree& tree, const EmitOptions& options) {
  std::ostringstream out;
  out << "/* Generated parser. Usage: prog <input> <output> */\n";
  out << kBegin << "\n" << kHelpers << kEnd << "\n\n";

  std::vector<const ParserTree*> leaves = Leaves(tree);
  std::map<const ParserTree*, std::size_t> leaf_ids;
  std::set<std::string> arrays;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    leaf_ids[leaves[i]] = i;
    if (leaves[i]->parser) {
      for (const LoopNest& n : leaves[i]->parser->nests) arrays.insert(n.array);
    }
  }
  // Arrays are chained in name order.
  std::map<std::string, std::string> array_vars;
  std::vector<std::string> names(arrays.begin(), arrays.end());
  for (std::size_t i = 0; i < names.size(); ++i) array_vars[names[i]] = "pg_arr" + std::to_string(i);
  for (std::size_t i = names.size(); i-- > 0;) {
    out << "static PgArray pg_arr" << i << " = {" << CString(names[i]) << ", NULL, 0, 0, 0, "
        << (i + 1 < names.size() ? "&pg_arr" + std::to_string(i + 1) : std::string("NULL")) << "};\n";
  }
  out << "\nstatic PgArray* pg_first_array(void) { return "
      << (names.empty() ? std::string("NULL") : "&pg_arr0") << "; }\n\n";

  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (leaves[i]->parser) EmitLeaf(out, *leaves[i]->parser, i, array_vars);
  }
  out << "static void pg_dispatch(void) {\n";
  EmitDispatch(out, tree, leaf_ids, "  ", options.partial);
  out << "}\n\n";
  out << "int main(int argc, char** argv) { return pg_main(argc, argv); }\n";
  return out.str();
}

std::vector<std::string> ScanEmitted(const std::string& source) {
  std::vector<std::string> findings;
  std::size_t b = source.find(kBegin);
  std::size_t e = source.find(kEnd);
  if (b == std::string::npos || e == std::string::npos || e < b ||
      source.find(kBegin, b + 1) != std::string::npos || source.find(kEnd, e + 1) != std::string::npos) {
    findings.push_back("safety helper section missing or duplicated");
    return findings;
  }
  std::string rest = source.substr(0, b) + source.substr(e + std::string(kEnd).size());
  // Blank out comments and string literals.
  std::string code;
  code.reserve(rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest.compare(i, 2, "/*") == 0) {
      std::size_t end = rest.find("*/", i + 2);
      end = end == std::string::npos ? rest.size() : end + 2;
      for (std::size_t j = i; j < end; ++j) code += rest[j] == '\n' ? '\n' : ' ';
      i = end - 1;
    } else if (rest[i] == '"') {
      std::size_t j = i + 1;
      while (j < rest.size() && rest[j] != '"') j += rest[j] == '\\' ? 2 : 1;
      code.append(std::min(j, rest.size() - 1) - i + 1, ' ');
      i = j;
    } else {
      code += rest[i];
    }
  }
  std::istringstream lines(code);
  std::string line;
  for (std::size_t no = 1; std::getline(lines, line); ++no) {
    auto flag = [&](const std::string& what) {
      findings.push_back("line " + std::to_string(no) + ": " + what);
    };
    if (line.find('[') != std::string::npos) flag("subscript outside the safety helpers");
    for (const char* token : {"fread", "fseek", "fopen", "fwrite", "->data", ".data", "memcpy"}) {
      if (line.find(token) != std::string::npos) flag(std::string("direct storage access: ") + token);
    }
  }
  return findings;
}

std::string FindCompiler() {
  std::vector<std::string> candidates;
  if (const char* cc = std::getenv("CC"); cc && *cc) candidates.emplace_back(cc);
  for (const char* c : {"cc", "gcc", "clang"}) candidates.emplace_back(c);
  for (const std::string& c : candidates) {
    if (RunCommand("command -v " + ShellQuote(c) + " >/dev/null 2>&1") == 0) return c;
  }
  return "";
}

EmitVerifyReport VerifyEmitted(const std::string& source, const ParserTree& tree,
                               std::span<const CorpusEntry> corpus, const std::string& work_dir,
                               const std::string& compiler) {
  EmitVerifyReport r;
  std::string cc = compiler.empty() ? FindCompiler() : compiler;
  if (cc.empty() || RunCommand("command -v " + ShellQuote(cc) + " >/dev/null 2>&1") != 0) {
    r.skipped = true;
    return r;
  }
  namespace fs = std::filesystem;
  fs::create_directories(work_dir);
  const fs::path src = fs::path(work_dir) / "parser.c";
  const fs::path bin = fs::path(work_dir) / "parser";
  const fs::path log = fs::path(work_dir) / "cc.log";
  WriteTextFile(src, source);
  int rc = RunCommand(ShellQuote(cc) + " -std=c99 -O1 -w -o " + ShellQuote(bin.string()) + " " +
                      ShellQuote(src.string()) + " > " + ShellQuote(log.string()) + " 2>&1");
  if (rc != 0) {
    r.diagnostics = ReadTextFile(log);
    return r;
  }
  r.compiled = true;
  const fs::path in = fs::path(work_dir) / "input.bin";
  const fs::path out = fs::path(work_dir) / "output.bin";
  for (const CorpusEntry& entry : corpus) {
    ++r.files;
    std::optional<OutputBuffers> want;
    const ParserTree& leaf = tree.Route(entry.bytes);
    if (leaf.parser) {
      try {
        want = Interpret(*leaf.parser, entry.bytes);
      } catch (const InterpError&) {
      }
    }
    WriteBinaryFile(in, entry.bytes);
    std::error_code ec;
    fs::remove(out, ec);
    int code = RunCommand(ShellQuote(bin.string()) + " " + ShellQuote(in.string()) + " " +
                          ShellQuote(out.string()) + " 2>/dev/null");
    if (!want) {
      if (code != 0 && code < 128) {
        ++r.identical;
      } else {
        r.failures.push_back(entry.name + ": expected a controlled failure, exit " + std::to_string(code));
      }
      continue;
    }
    if (code != 0) {
      r.failures.push_back(entry.name + ": exit " + std::to_string(code));
      continue;
    }
    OutputBuffers got = ReadOutputs(out);
    if (got == *want) {
      ++r.identical;
    } else {
      r.failures.push_back(entry.name + ": output differs from the interpreter");
    }
  }
  return r;
}

}  // namespace parsegen
