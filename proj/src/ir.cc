#include "parsegen/ir.h"

#include <algorithm>
#include <sstream>

namespace parsegen {

namespace {

std::string Suffix(std::size_t nest) {
  return nest == 0 ? std::string() : "_N" + std::to_string(nest);
}

std::string FieldText(const FieldRef& f) {
  return "read_le(" + std::to_string(f.offset) + ", " + std::to_string(f.bytes * 8) +
         ", " + (f.is_signed ? "signed" : "unsigned") + ")";
}

void Indent(std::string& out, std::size_t depth) { out.append(2 * depth, ' '); }

}  // namespace

std::int64_t Pad4(std::int64_t x) {
  if (x >= 0) return (x + 3) / 4 * 4;
  return -((-x + 3) / 4 * 4);
}

std::string LevelLetter(std::size_t level) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('A' + level % 26));
    level /= 26;
  } while (level-- > 0);
  return s;
}

std::string BoundSymbol(std::size_t nest, std::size_t level) {
  return "LOOP_BOUND_" + LevelLetter(level) + Suffix(nest);
}
std::string OutFactorSymbol(std::size_t nest, std::size_t level) {
  return "FACTOR_" + LevelLetter(level + 1) + "_0" + Suffix(nest);
}
std::string InFactorSymbol(std::size_t nest, std::size_t level) {
  return "FACTOR_" + LevelLetter(level + 1) + "_1" + Suffix(nest);
}
std::string AddendSymbol(std::size_t nest, std::size_t level) {
  return "ADDEND_" + LevelLetter(level + 1) + "_1" + Suffix(nest);
}
std::string MinXSymbol(std::size_t nest) { return "MIN_X" + Suffix(nest); }
std::string MinYSymbol(std::size_t nest) { return "MIN_Y" + Suffix(nest); }

SymbolEnv ConcreteEnv(const IrProgram& p) {
  SymbolEnv env;
  for (std::size_t k = 0; k < p.nests.size(); ++k) {
    const LoopNest& n = p.nests[k];
    env[MinXSymbol(k)] = n.min_x;
    env[MinYSymbol(k)] = n.min_y;
    for (std::size_t l = 0; l < n.levels.size(); ++l) {
      const LoopLevel& lv = n.levels[l];
      env[BoundSymbol(k, l)] = lv.bound();
      env[OutFactorSymbol(k, l)] = lv.out_factor;
      env[InFactorSymbol(k, l)] = lv.in_factor;
      if (lv.in_addend != 0) env[AddendSymbol(k, l)] = lv.in_addend;
    }
  }
  return env;
}

std::int64_t NestEnd(const IrProgram& p, std::size_t k, const SymbolEnv& env) {
  const LoopNest& n = p.nests[k];
  auto get = [&](const std::string& name, std::int64_t fallback) {
    auto it = env.find(name);
    return it == env.end() ? fallback : it->second;
  };
  __int128 end = static_cast<__int128>(get(MinYSymbol(k), n.min_y)) + n.y0_delta;
  for (std::size_t l = 0; l < n.levels.size(); ++l) {
    const LoopLevel& lv = n.levels[l];
    __int128 bound = get(BoundSymbol(k, l), lv.bound());
    if (bound <= 0) return get(MinYSymbol(k), n.min_y);
    __int128 count = (bound + lv.step - 1) / lv.step;
    __int128 f = get(InFactorSymbol(k, l), lv.in_factor);
    __int128 a = lv.in_addend == 0 ? 0 : get(AddendSymbol(k, l), lv.in_addend);
    __int128 first = a * f;
    __int128 last = ((count - 1) * lv.step + a) * f;
    end += std::max(first, last);
  }
  std::int64_t max_delta = 0;
  bool any = false;
  for (const BodyStmt& s : n.body) {
    for (std::int64_t d : s.in_deltas) {
      max_delta = any ? std::max(max_delta, d) : d;
      any = true;
    }
  }
  if (!any) return get(MinYSymbol(k), n.min_y);
  end += max_delta + 1;
  if (end > INT64_MAX || end < INT64_MIN) return INT64_MAX;
  return static_cast<std::int64_t>(end);
}

std::string RenderDefinition(const Definition& d) {
  switch (d.kind) {
    case Definition::Kind::kField:
      return (d.negate ? "-" : "") + FieldText(d.a) +
             (d.scale == 1 ? "" : " * " + std::to_string(d.scale));
    case Definition::Kind::kProduct:
      return (d.negate ? "-" : "") + FieldText(d.a) + " * " + FieldText(d.b) +
             (d.scale == 1 ? "" : " * " + std::to_string(d.scale));
    case Definition::Kind::kAdjacency:
      return "end_of_nest(" + std::to_string(d.nest) + ")";
    case Definition::Kind::kRewrite:
      switch (d.rewrite) {
        case RewriteKind::kNegPlusOne: return "(-" + d.x + " + 1)";
        case RewriteKind::kMul: return d.x + " * " + d.y;
        case RewriteKind::kNegMul: return "-" + d.x + " * " + d.y;
        case RewriteKind::kPad4Mul: return "pad4(" + d.x + " * " + d.y + ")";
        case RewriteKind::kPad4NegMul: return "pad4(-" + d.x + " * " + d.y + ")";
      }
  }
  return "?";
}

std::string ProgramText(const IrProgram& p) {
  std::map<std::string, const Definition*> defs;
  for (const Definition& d : p.defs) defs[d.symbol] = &d;
  std::string out;
  auto declare = [&](const std::string& name, const std::string& value) {
    out += name;
    out += " := ";
    out += value;
    out += ';';
    auto it = defs.find(name);
    if (it != defs.end()) {
      out += " // ";
      out += RenderDefinition(*it->second);
    }
    out += '\n';
  };
  out += "STRIDE := " + std::to_string(p.stride) + ";\n";
  for (std::size_t i = 0; i < p.shapes.size(); ++i) {
    out += "EXPR_" + std::to_string(i) + " := " + p.shapes[i].key + ";\n";
  }
  for (std::size_t k = 0; k < p.nests.size(); ++k) {
    const LoopNest& n = p.nests[k];
    const std::string sfx = Suffix(k);
    out += "// " + n.array + "\n";
    declare(MinXSymbol(k), std::to_string(n.min_x));
    declare(MinYSymbol(k), std::to_string(n.min_y));
    const std::string min_y0 = "MIN_Y0_0" + sfx;
    declare(min_y0, MinYSymbol(k) + " + " + std::to_string(n.y0_delta));
    for (std::size_t l = 0; l < n.levels.size(); ++l) {
      declare(BoundSymbol(k, l), std::to_string(n.levels[l].bound()));
    }
    for (std::size_t l = 0; l < n.levels.size(); ++l) {
      declare(OutFactorSymbol(k, l), std::to_string(n.levels[l].out_factor));
      declare(InFactorSymbol(k, l), std::to_string(n.levels[l].in_factor));
      if (n.levels[l].in_addend != 0) {
        declare(AddendSymbol(k, l), std::to_string(n.levels[l].in_addend));
      }
    }
    std::size_t depth = 0;
    for (std::size_t i = n.levels.size(); i-- > 0;) {
      const LoopLevel& lv = n.levels[i];
      const std::string idx = "idx" + LevelLetter(i);
      const std::string letter = LevelLetter(i);
      Indent(out, depth);
      out += "for (" + idx + " := 0; " + idx + " < " + BoundSymbol(k, i) + "; " + idx +
             (lv.step == 1 ? "++" : " += " + std::to_string(lv.step)) + ") {\n";
      ++depth;
      std::string outer0, outer1;
      if (i + 1 < n.levels.size()) {
        outer0 = " + NUM_" + LevelLetter(i + 1) + "_0";
        outer1 = " + NUM_" + LevelLetter(i + 1) + "_1";
      }
      Indent(out, depth);
      out += "NUM_" + letter + "_0 := " + idx + " * " + OutFactorSymbol(k, i) + outer0 + ";\n";
      Indent(out, depth);
      if (lv.in_addend != 0) {
        out += "NUM_" + letter + "_1 := (" + idx + " + " + AddendSymbol(k, i) + ") * " +
               InFactorSymbol(k, i) + outer1 + ";\n";
      } else {
        out += "NUM_" + letter + "_1 := " + idx + " * " + InFactorSymbol(k, i) + outer1 + ";\n";
      }
    }
    for (std::size_t j = 0; j < n.body.size(); ++j) {
      const BodyStmt& s = n.body[j];
      const std::string xj = "x" + std::to_string(j);
      Indent(out, depth);
      if (j == 0) {
        out += n.levels.empty() ? "x0 := " + MinXSymbol(k) + ";"
                                : "x0 := NUM_A_0 + " + MinXSymbol(k) + ";";
      } else {
        out += xj + " := x0 + " + std::to_string(s.out_delta) + ";";
      }
      std::string args;
      for (std::size_t q = 0; q < s.in_deltas.size(); ++q) {
        const std::string y = "y" + std::to_string(j) + "_" + std::to_string(q);
        if (j == 0 && q == 0) {
          out += n.levels.empty() ? " y0_0 := " + min_y0 + ";"
                                  : " y0_0 := NUM_A_1 + " + min_y0 + ";";
        } else {
          out += " " + y + " := y0_0 + " + std::to_string(s.in_deltas[q]) + ";";
        }
        args += (q == 0 ? "" : ", ") + y;
      }
      out += '\n';
      Indent(out, depth);
      out += n.array + "[" + xj + "] := EXPR_" + std::to_string(s.shape) + "(" + args + ");\n";
    }
    while (depth > 0) {
      --depth;
      Indent(out, depth);
      out += "}\n";
    }
  }
  return out;
}

std::string SkeletonKey(const IrProgram& p) {
  std::ostringstream k;
  k << "s" << p.stride;
  for (const Shape& s : p.shapes) k << "|" << s.key;
  for (const LoopNest& n : p.nests) {
    k << "#" << n.array << "@" << n.min_x << ":";
    for (std::size_t l = 0; l < n.levels.size(); ++l) {
      const LoopLevel& lv = n.levels[l];
      k << "L" << lv.step << (lv.in_addend != 0 ? "r" : "f");
      if (l == 0) k << "(" << lv.out_factor << "," << lv.in_factor << ")";
    }
    for (const BodyStmt& s : n.body) {
      k << "{" << s.out_delta << "," << s.shape;
      for (std::int64_t d : s.in_deltas) k << "," << d;
      k << "}";
    }
  }
  return k.str();
}

}  // namespace parsegen
