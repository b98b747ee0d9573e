#include "parsegen/interp.h"

#include <algorithm>

namespace parsegen {

namespace {

using i128 = __int128;

std::int64_t Checked(i128 v, const std::string& what) {
  if (v > INT64_MAX || v < INT64_MIN) {
    throw InterpError(InterpError::Kind::kOverflow, 0, what + " overflows 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

std::int64_t Lookup(const SymbolEnv& env, const std::string& name) {
  auto it = env.find(name);
  if (it == env.end()) {
    throw InterpError(InterpError::Kind::kUnboundSymbol, 0, "unbound symbol " + name);
  }
  return it->second;
}

std::int64_t EvalRewrite(const Definition& d, const SymbolEnv& env) {
  i128 x = Lookup(env, d.x);
  if (d.rewrite == RewriteKind::kNegPlusOne) return Checked(-x + 1, d.symbol);
  i128 y = Lookup(env, d.y);
  i128 xy = x * y;  // both operands fit in 64 bits
  switch (d.rewrite) {
    case RewriteKind::kMul: return Checked(xy, d.symbol);
    case RewriteKind::kNegMul: return Checked(-xy, d.symbol);
    case RewriteKind::kPad4Mul: return Pad4(Checked(xy, d.symbol));
    case RewriteKind::kPad4NegMul: return Pad4(Checked(-xy, d.symbol));
    default: break;
  }
  return 0;
}

}  // namespace

std::string_view InterpErrorKindName(InterpError::Kind kind) {
  switch (kind) {
    case InterpError::Kind::kReadPastEnd: return "read-past-end";
    case InterpError::Kind::kNegativeIndex: return "negative-output-index";
    case InterpError::Kind::kUnboundSymbol: return "unbound-symbol";
    case InterpError::Kind::kOverflow: return "overflow";
    case InterpError::Kind::kLimit: return "limit";
  }
  return "?";
}

std::int64_t ReadField(std::span<const std::uint8_t> file, const FieldRef& f) {
  std::uint64_t end = static_cast<std::uint64_t>(f.offset) + f.bytes;
  if (end > file.size()) {
    std::int64_t missing = std::max<std::int64_t>(f.offset, static_cast<std::int64_t>(file.size()));
    throw InterpError(InterpError::Kind::kReadPastEnd, missing,
                      "header read at offset " + std::to_string(missing) +
                          " is past the end of the input");
  }
  std::uint64_t v = 0;
  for (unsigned i = 0; i < f.bytes; ++i) v |= static_cast<std::uint64_t>(file[f.offset + i]) << (8 * i);
  if (f.is_signed) {
    if (f.bytes < 8) {
      std::uint64_t sign = 1ULL << (8 * f.bytes - 1);
      if (v & sign) v |= ~((sign << 1) - 1);
    }
    return static_cast<std::int64_t>(v);
  }
  if (v > static_cast<std::uint64_t>(INT64_MAX)) {
    throw InterpError(InterpError::Kind::kOverflow, f.offset, "unsigned 64-bit field too large");
  }
  return static_cast<std::int64_t>(v);
}

SymbolEnv ResolveEnv(const IrProgram& p, std::span<const std::uint8_t> file) {
  SymbolEnv env = ConcreteEnv(p);
  for (const Definition& d : p.defs) {
    std::int64_t v = 0;
    switch (d.kind) {
      case Definition::Kind::kField:
        v = Checked(static_cast<i128>(ReadField(file, d.a)) * d.scale * (d.negate ? -1 : 1),
                    d.symbol);
        break;
      case Definition::Kind::kProduct: {
        i128 prod = static_cast<i128>(ReadField(file, d.a)) * ReadField(file, d.b);
        prod = static_cast<i128>(Checked(prod, d.symbol)) * d.scale;
        v = Checked(d.negate ? -prod : prod, d.symbol);
        break;
      }
      case Definition::Kind::kAdjacency:
        if (d.nest >= p.nests.size()) {
          throw InterpError(InterpError::Kind::kUnboundSymbol, 0, "adjacency to a missing nest");
        }
        v = NestEnd(p, d.nest, env);
        if (v == INT64_MAX) throw InterpError(InterpError::Kind::kOverflow, 0, d.symbol + " overflows");
        break;
      case Definition::Kind::kRewrite:
        v = EvalRewrite(d, env);
        break;
    }
    env[d.symbol] = v;
  }
  return env;
}

CompiledShape::CompiledShape(const ByteExpr& pattern) {
  if (pattern.op() == Op::kRead && pattern.offset() == 0) {
    copy_ = true;
    return;
  }
  std::size_t depth = 0, max_depth = 0;
  struct Frame {
    const ExprNode* node;
    bool expanded;
  };
  std::vector<Frame> work{{pattern.node(), false}};
  // Post-order traversal; tracks evaluation stack depth.
  while (!work.empty()) {
    Frame f = work.back();
    work.pop_back();
    const ExprNode& n = *f.node;
    bool leaf = n.op == Op::kRead || n.op == Op::kConst;
    if (!leaf && !f.expanded) {
      work.push_back({f.node, true});
      if (n.op != Op::kZeroExtend && n.op != Op::kSignExtend && n.op != Op::kExtract) {
        work.push_back({n.b.node(), false});
      }
      work.push_back({n.a.node(), false});
      continue;
    }
    Instr in{n.op, n.width, n.value, n.hi, n.lo, n.offset, ExprNode{}};
    in.node.op = n.op;
    in.node.width = n.width;
    in.node.hi = n.hi;
    in.node.lo = n.lo;
    code_.push_back(std::move(in));
    if (leaf) {
      max_depth = std::max(max_depth, ++depth);
    } else if (n.op != Op::kZeroExtend && n.op != Op::kSignExtend && n.op != Op::kExtract) {
      --depth;
    }
  }
  if (max_depth > 64) throw SchemaError("expression too deep to evaluate");
}

OutputBuffers Interpret(const IrProgram& p, std::span<const std::uint8_t> file,
                        const InterpLimits& limits) {
  SymbolEnv env = ResolveEnv(p, file);
  std::vector<CompiledShape> shapes;
  shapes.reserve(p.shapes.size());
  for (const Shape& s : p.shapes) shapes.emplace_back(s.pattern);

  OutputBuffers out;
  std::uint64_t total_out = 0;
  std::uint64_t total_records = 0;
  const auto size = static_cast<std::int64_t>(file.size());

  for (std::size_t k = 0; k < p.nests.size(); ++k) {
    const LoopNest& n = p.nests[k];
    const std::size_t L = n.levels.size();
    std::vector<std::int64_t> count(L), out_step(L), in_step(L);
    i128 out_base = Lookup(env, MinXSymbol(k));
    i128 in_base = static_cast<i128>(Lookup(env, MinYSymbol(k))) + n.y0_delta;
    i128 records = 1;
    for (std::size_t l = 0; l < L; ++l) {
      const LoopLevel& lv = n.levels[l];
      i128 bound = Lookup(env, BoundSymbol(k, l));
      i128 c = bound <= 0 ? 0 : (bound + lv.step - 1) / lv.step;
      i128 fo = Lookup(env, OutFactorSymbol(k, l));
      i128 fi = Lookup(env, InFactorSymbol(k, l));
      i128 a = lv.in_addend == 0 ? 0 : Lookup(env, AddendSymbol(k, l));
      records *= c;
      if (records > static_cast<i128>(limits.max_records)) {
        throw InterpError(InterpError::Kind::kLimit, 0, "loop iteration limit exceeded");
      }
      count[l] = static_cast<std::int64_t>(c);
      out_step[l] = Checked(fo * lv.step, "output step");
      in_step[l] = Checked(fi * lv.step, "input step");
      in_base += a * fi;
    }
    if (records == 0) continue;
    total_records += static_cast<std::uint64_t>(records);
    if (total_records > limits.max_records) {
      throw InterpError(InterpError::Kind::kLimit, 0, "loop iteration limit exceeded");
    }
    std::vector<std::uint8_t>& buf = out[n.array];
    std::vector<std::int64_t> idx(L, 0);
    i128 cur_out = out_base;
    i128 cur_in = in_base;
    while (true) {
      for (const BodyStmt& s : n.body) {
        i128 o = cur_out + s.out_delta;
        if (o < 0) {
          throw InterpError(InterpError::Kind::kNegativeIndex, Checked(o, "output index"),
                            "negative output index " + std::to_string(Checked(o, "output index")));
        }
        if (o >= static_cast<i128>(limits.max_output_bytes)) {
          throw InterpError(InterpError::Kind::kLimit, 0, "output size limit exceeded");
        }
        auto read = [&](std::uint64_t q) -> std::uint8_t {
          i128 at = cur_in + s.in_deltas[q];
          if (at < 0 || at >= size) {
            std::int64_t off = Checked(at, "input offset");
            throw InterpError(InterpError::Kind::kReadPastEnd, off,
                              "read of input offset " + std::to_string(off) +
                                  " is out of range");
          }
          return file[static_cast<std::size_t>(at)];
        };
        std::uint8_t byte = shapes[s.shape].Eval(read);
        auto oi = static_cast<std::size_t>(o);
        if (oi >= buf.size()) {
          total_out += oi + 1 - buf.size();
          if (total_out > limits.max_output_bytes) {
            throw InterpError(InterpError::Kind::kLimit, 0, "output size limit exceeded");
          }
          buf.resize(oi + 1, 0);
        }
        buf[oi] = byte;
      }
      std::size_t l = 0;
      for (; l < L; ++l) {
        if (++idx[l] < count[l]) {
          cur_out += out_step[l];
          cur_in += in_step[l];
          break;
        }
        cur_out -= static_cast<i128>(out_step[l]) * (count[l] - 1);
        cur_in -= static_cast<i128>(in_step[l]) * (count[l] - 1);
        idx[l] = 0;
      }
      if (l == L) break;
    }
  }
  return out;
}

}  // namespace parsegen
