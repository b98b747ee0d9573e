#include "parsegen/generalize.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "parsegen/interp.h"

namespace parsegen {

namespace {

using i128 = __int128;

// Field bindings may carry a small constant factor (bytes per pixel).
constexpr std::int64_t kMaxScale = 8;

struct TupleHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint32_t x : v) {
      h ^= x;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

Definition RewriteDef(RewriteKind kind, const std::string& x, const std::string& y) {
  Definition d;
  d.kind = Definition::Kind::kRewrite;
  d.rewrite = kind;
  d.x = x;
  d.y = y;
  return d;
}

Candidate FromDef(Definition d) {
  Candidate c;
  c.key = RenderDefinition(d);
  c.def = std::move(d);
  return c;
}

Candidate Literal(std::int64_t value) {
  Candidate c;
  c.key = std::to_string(value);
  return c;
}

// Little-endian value of a field, or nullopt if it does not fit in int64.
std::optional<std::int64_t> FieldValue(std::span<const std::uint8_t> file, const FieldRef& f) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < f.bytes; ++i) v |= static_cast<std::uint64_t>(file[f.offset + i]) << (8 * i);
  if (f.is_signed) {
    if (f.bytes < 8) {
      std::uint64_t sign = 1ULL << (8 * f.bytes - 1);
      if (v & sign) v |= ~((sign << 1) - 1);
    }
    return static_cast<std::int64_t>(v);
  }
  if (v > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
  return static_cast<std::int64_t>(v);
}

bool FieldLess(const FieldRef& a, const FieldRef& b) {
  return std::tie(a.offset, a.bytes, a.is_signed) < std::tie(b.offset, b.bytes, b.is_signed);
}

Candidate FieldCandidate(const FieldRef& f, bool negate, std::int64_t scale) {
  Definition d;
  d.kind = Definition::Kind::kField;
  d.a = f;
  d.negate = negate;
  d.scale = scale;
  Candidate c = FromDef(std::move(d));
  c.terms = scale == 1 ? 1 : 2;
  c.neg_bits = -static_cast<int>(f.bytes * 8);
  c.neg_signed = f.is_signed ? -1 : 0;
  return c;
}

Candidate ProductCandidate(const FieldRef& a, const FieldRef& b, bool negate,
                           std::int64_t scale) {
  Definition d;
  d.kind = Definition::Kind::kProduct;
  d.a = a;
  d.b = b;
  d.negate = negate;
  d.scale = scale;
  Candidate c = FromDef(std::move(d));
  c.terms = scale == 1 ? 2 : 3;
  c.neg_bits = -static_cast<int>((a.bytes + b.bytes) * 8);
  c.neg_signed = -(a.is_signed ? 1 : 0) - (b.is_signed ? 1 : 0);
  return c;
}

struct TupleRank {
  std::uint64_t votes = 0;
  int literals = 0, terms = 0, neg_bits = 0, neg_signed = 0;
  std::size_t length = 0;
  std::string joined;
};

// True if `a` should be preferred over `b`.
bool Better(const TupleRank& a, const TupleRank& b) {
  if (a.votes != b.votes) return a.votes > b.votes;
  auto ka = std::tie(a.literals, a.terms, a.neg_bits, a.neg_signed, a.length, a.joined);
  auto kb = std::tie(b.literals, b.terms, b.neg_bits, b.neg_signed, b.length, b.joined);
  return ka < kb;
}

TupleRank RankOf(const std::vector<const Candidate*>& tuple, std::uint64_t votes) {
  TupleRank r;
  r.votes = votes;
  for (const Candidate* c : tuple) {
    r.literals += c->literals;
    r.terms += c->terms;
    r.neg_bits += c->neg_bits;
    r.neg_signed += c->neg_signed;
    r.length += c->key.size();
    r.joined += c->key;
    r.joined += '\n';
  }
  return r;
}

// Fills choice indices and supporters for chosen keys.
void Finish(const CandidateTable& table, VoteResult& result) {
  result.supporters.clear();
  for (std::size_t f = 0; f < table.size(); ++f) {
    bool ok = true;
    for (std::size_t v = 0; v < result.keys.size() && ok; ++v) {
      ok = std::any_of(table[f][v].begin(), table[f][v].end(),
                       [&](const Candidate& c) { return c.key == result.keys[v]; });
    }
    if (ok) result.supporters.push_back(f);
  }
  result.choice.assign(result.keys.size(), 0);
  if (result.supporters.empty()) return;
  const auto& first = table[result.supporters[0]];
  for (std::size_t v = 0; v < result.keys.size(); ++v) {
    for (std::size_t i = 0; i < first[v].size(); ++i) {
      if (first[v][i].key == result.keys[v]) {
        result.choice[v] = i;
        break;
      }
    }
  }
}

void CheckProblem(const AssignProblem& p) {
  if (p.weights.size() != p.variables) throw std::invalid_argument("weights do not match variables");
  for (const auto& per_e : p.weights) {
    if (per_e.size() != p.expressions.size()) {
      throw std::invalid_argument("weights do not match expressions");
    }
    for (const auto& per_f : per_e) {
      if (per_f.size() != p.files) throw std::invalid_argument("weights do not match files");
    }
  }
}

// (v, e) preferred by the greedy variants: larger weight, then shorter
// expression, then smaller v, then smaller e.
bool GreedyBetter(const AssignProblem& p, std::uint64_t wa, std::size_t va, std::size_t ea,
                  std::uint64_t wb, std::size_t vb, std::size_t eb) {
  if (wa != wb) return wa > wb;
  std::size_t la = p.expressions[ea].size(), lb = p.expressions[eb].size();
  if (la != lb) return la < lb;
  if (va != vb) return va < vb;
  return ea < eb;
}

AssignResult Simplest(const AssignProblem& p) {
  AssignResult r;
  std::vector<bool> compat(p.files, true);
  if (p.files == 0) return r;
  const std::size_t ex = 0;
  for (std::size_t v = 0; v < p.variables; ++v) {
    std::size_t best = SIZE_MAX;
    for (std::size_t e = 0; e < p.expressions.size(); ++e) {
      std::uint32_t w = p.weights[v][e][ex];
      if (w > 0 && (best == SIZE_MAX || w < p.weights[v][best][ex])) best = e;
    }
    if (best == SIZE_MAX) continue;
    r.assignments.emplace_back(v, best);
    for (std::size_t f = 0; f < p.files; ++f) {
      if (p.weights[v][best][f] == 0) compat[f] = false;
    }
  }
  for (std::size_t f = 0; f < p.files; ++f) {
    if (compat[f]) r.compatible.push_back(f);
  }
  return r;
}

AssignResult Conceptual(const AssignProblem& p) {
  AssignResult r;
  std::vector<bool> compat(p.files, true);
  std::vector<bool> assigned(p.variables, false);
  while (true) {
    std::uint64_t total = 0;
    std::uint64_t best_w = 0;
    std::size_t best_v = SIZE_MAX, best_e = SIZE_MAX;
    for (std::size_t v = 0; v < p.variables; ++v) {
      if (assigned[v]) continue;
      for (std::size_t e = 0; e < p.expressions.size(); ++e) {
        std::uint64_t w = 0;
        for (std::size_t f = 0; f < p.files; ++f) {
          if (compat[f]) w += p.weights[v][e][f];
        }
        total += w;
        if (w > 0 && (best_v == SIZE_MAX || GreedyBetter(p, w, v, e, best_w, best_v, best_e))) {
          best_w = w;
          best_v = v;
          best_e = e;
        }
      }
    }
    if (total == 0) break;
    r.assignments.emplace_back(best_v, best_e);
    assigned[best_v] = true;
    for (std::size_t f = 0; f < p.files; ++f) {
      if (compat[f] && p.weights[best_v][best_e][f] == 0) compat[f] = false;
    }
  }
  for (std::size_t f = 0; f < p.files; ++f) {
    if (compat[f]) r.compatible.push_back(f);
  }
  return r;
}

AssignResult Optimized(const AssignProblem& p) {
  AssignResult r;
  // Sparse W: for each (v, e), the files with positive weight.
  std::vector<std::vector<std::vector<std::size_t>>> nz(p.variables);
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> weights;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> per_file(p.files);
  for (std::size_t v = 0; v < p.variables; ++v) {
    nz[v].resize(p.expressions.size());
    for (std::size_t e = 0; e < p.expressions.size(); ++e) {
      for (std::size_t f = 0; f < p.files; ++f) {
        std::uint32_t w = p.weights[v][e][f];
        if (w == 0) continue;
        nz[v][e].push_back(f);
        weights[{v, e}] += w;
        per_file[f].emplace_back(v, e);
      }
    }
  }
  auto prune = [&](std::size_t v, std::size_t e, std::size_t f) {
    ++r.prune_calls;
    auto it = weights.find({v, e});
    it->second -= p.weights[v][e][f];
    if (it->second == 0) weights.erase(it);
  };

  std::vector<bool> assigned(p.variables, false);
  std::vector<bool> remaining(p.files, true);
  std::vector<bool> compatible(p.files, true);
  bool ran = false;
  while (!weights.empty()) {
    ran = true;
    auto best = weights.begin();
    for (auto it = std::next(weights.begin()); it != weights.end(); ++it) {
      if (GreedyBetter(p, it->second, it->first.first, it->first.second, best->second,
                       best->first.first, best->first.second)) {
        best = it;
      }
    }
    const auto [bv, be] = best->first;
    r.assignments.emplace_back(bv, be);

    std::fill(compatible.begin(), compatible.end(), false);
    for (std::size_t f : nz[bv][be]) {
      if (remaining[f]) compatible[f] = true;
    }
    for (std::size_t e = 0; e < p.expressions.size(); ++e) {
      for (std::size_t f : nz[bv][e]) {
        if (compatible[f]) prune(bv, e, f);
      }
    }
    for (std::size_t f = 0; f < p.files; ++f) {
      if (!remaining[f] || compatible[f]) continue;
      remaining[f] = false;
      for (const auto& [v, e] : per_file[f]) {
        if (!assigned[v]) prune(v, e, f);
      }
    }
    assigned[bv] = true;
  }
  for (std::size_t f = 0; f < p.files; ++f) {
    if (ran ? compatible[f] : true) r.compatible.push_back(f);
  }
  return r;
}

std::vector<std::string> ScopeSymbols(std::size_t k, std::size_t below, bool include_bound_at) {
  std::vector<std::string> s;
  for (std::size_t l = 0; l < below; ++l) {
    s.push_back(BoundSymbol(k, l));
    s.push_back(OutFactorSymbol(k, l));
    s.push_back(InFactorSymbol(k, l));
  }
  if (include_bound_at) s.push_back(BoundSymbol(k, below));
  return s;
}

VoteResult Vote(const CandidateTable& table, const GeneralizeOptions& options, bool* fallback) {
  switch (options.voting) {
    case VotingMode::kCartesian:
      if (auto r = VoteCartesian(table, options.tuple_cap)) return *r;
      if (fallback) *fallback = true;
      return VoteGreedy(table, AssignVariant::kOptimized);
    case VotingMode::kSimplest: return VoteGreedy(table, AssignVariant::kSimplest);
    case VotingMode::kConceptual: return VoteGreedy(table, AssignVariant::kConceptual);
    case VotingMode::kOptimized: return VoteGreedy(table, AssignVariant::kOptimized);
  }
  return VoteGreedy(table, AssignVariant::kOptimized);
}

bool Reproduces(const IrProgram& p, const GroupExample& ex) {
  if (ex.expected == nullptr) return false;
  try {
    return Interpret(p, ex.file) == *ex.expected;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::vector<Candidate> EnumerateRewrites(std::int64_t value, const SymbolEnv& in_scope) {
  std::vector<Candidate> out;
  const i128 t = value;
  std::vector<std::pair<std::string, std::int64_t>> syms(in_scope.begin(), in_scope.end());
  for (const auto& [x, xv] : syms) {
    if (-static_cast<i128>(xv) + 1 == t) out.push_back(FromDef(RewriteDef(RewriteKind::kNegPlusOne, x, "")));
  }
  for (std::size_t i = 0; i < syms.size(); ++i) {
    for (std::size_t j = i; j < syms.size(); ++j) {
      const auto& [x, xv] = syms[i];
      const auto& [y, yv] = syms[j];
      i128 xy = static_cast<i128>(xv) * yv;
      if (xy > INT64_MAX || xy < INT64_MIN) continue;
      auto p = static_cast<std::int64_t>(xy);
      if (xy == t) out.push_back(FromDef(RewriteDef(RewriteKind::kMul, x, y)));
      if (-xy == t) out.push_back(FromDef(RewriteDef(RewriteKind::kNegMul, x, y)));
      if (Pad4(p) == value) out.push_back(FromDef(RewriteDef(RewriteKind::kPad4Mul, x, y)));
      if (Pad4(-p) == value) out.push_back(FromDef(RewriteDef(RewriteKind::kPad4NegMul, x, y)));
    }
  }
  if (out.empty()) out.push_back(Literal(value));
  return out;
}

std::vector<RewriteVar> RewriteVariables(const IrProgram& program) {
  std::vector<RewriteVar> vars;
  for (std::size_t k = 0; k < program.nests.size(); ++k) {
    const LoopNest& n = program.nests[k];
    for (std::size_t l = 0; l < n.levels.size(); ++l) {
      if (l > 0) {
        vars.push_back({OutFactorSymbol(k, l), k, ScopeSymbols(k, l, false)});
        vars.push_back({InFactorSymbol(k, l), k, ScopeSymbols(k, l, false)});
      }
      if (n.levels[l].in_addend != 0) {
        vars.push_back({AddendSymbol(k, l), k, ScopeSymbols(k, l, true)});
      }
    }
  }
  return vars;
}

std::vector<std::string> BindingVariables(const IrProgram& program) {
  std::vector<std::string> vars;
  for (std::size_t k = 0; k < program.nests.size(); ++k) {
    for (std::size_t l = 0; l < program.nests[k].levels.size(); ++l) {
      vars.push_back(BoundSymbol(k, l));
    }
    vars.push_back(MinYSymbol(k));
  }
  return vars;
}

std::vector<Candidate> EnumerateBindings(const IrProgram& program, const std::string& symbol,
                                         std::span<const std::uint8_t> file,
                                         const SymbolEnv& env, const BindOptions& options) {
  auto it = env.find(symbol);
  if (it == env.end()) throw std::invalid_argument("unknown symbol " + symbol);
  const std::int64_t t = it->second;
  std::vector<Candidate> out;
  // Fields come from the header proper: bytes before the first data read.
  std::size_t limit = std::min<std::size_t>(options.header_size, file.size());
  for (const LoopNest& n : program.nests) {
    if (n.min_y >= 0) limit = std::min<std::size_t>(limit, static_cast<std::size_t>(n.min_y));
  }

  // Fields of 16 and 32 bits with |value| >= 2, for products.
  std::unordered_map<std::int64_t, std::vector<FieldRef>> factors;
  for (unsigned bytes : {1u, 2u, 4u, 8u}) {
    for (std::size_t off = 0; off + bytes <= limit; ++off) {
      for (bool is_signed : {false, true}) {
        FieldRef f{static_cast<std::uint32_t>(off), bytes, is_signed};
        auto v = FieldValue(file, f);
        if (!v) continue;
        if (*v == t) out.push_back(FieldCandidate(f, false, 1));
        if (*v != 0 && *v != INT64_MIN && -*v == t) out.push_back(FieldCandidate(f, true, 1));
        for (std::int64_t scale = 2; scale <= kMaxScale && *v != 0; ++scale) {
          i128 sv = static_cast<i128>(*v) * scale;
          if (sv == t) out.push_back(FieldCandidate(f, false, scale));
          if (-sv == t) out.push_back(FieldCandidate(f, true, scale));
        }
        if ((bytes == 2 || bytes == 4) && (*v >= 2 || *v <= -2)) factors[*v].push_back(f);
      }
    }
  }
  std::vector<std::pair<std::int64_t, const std::vector<FieldRef>*>> sorted;
  for (const auto& [v, fs] : factors) sorted.emplace_back(v, &fs);
  std::sort(sorted.begin(), sorted.end());
  for (std::int64_t scale = 1; scale <= kMaxScale && t != 0 && t != INT64_MIN; ++scale) {
    if (t % scale != 0) continue;
    const std::int64_t ts = t / scale;
    for (const auto& [va, as] : sorted) {
      if (ts % va != 0) continue;
      for (bool negate : {false, true}) {
        std::int64_t want = (negate ? -ts : ts) / va;
        auto bt = factors.find(want);
        if (bt == factors.end()) continue;
        for (const FieldRef& a : *as) {
          for (const FieldRef& b : bt->second) {
            if (FieldLess(b, a)) continue;
            out.push_back(ProductCandidate(a, b, negate, scale));
          }
        }
      }
    }
  }
  // Adjacency: this nest's input base is the end of an earlier nest.
  for (std::size_t k = 1; k < program.nests.size(); ++k) {
    if (symbol != MinYSymbol(k)) continue;
    for (std::size_t i = 0; i < k; ++i) {
      if (NestEnd(program, i, env) != t) continue;
      Definition d;
      d.kind = Definition::Kind::kAdjacency;
      d.nest = i;
      Candidate c = FromDef(std::move(d));
      c.terms = 1;
      out.push_back(std::move(c));
    }
  }
  Candidate lit = Literal(t);
  lit.literals = 1;
  out.push_back(std::move(lit));
  return out;
}

namespace {

// Header fields bound in one tuple must be identical or disjoint; a byte
// belongs to one field.
bool LayoutConsistent(const std::vector<const Candidate*>& cands) {
  std::vector<FieldRef> fields;
  for (const Candidate* c : cands) {
    if (!c->def) continue;
    const Definition& d = *c->def;
    if (d.kind == Definition::Kind::kField || d.kind == Definition::Kind::kProduct) fields.push_back(d.a);
    if (d.kind == Definition::Kind::kProduct) fields.push_back(d.b);
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      const FieldRef& a = fields[i];
      const FieldRef& b = fields[j];
      if (a.offset == b.offset && a.bytes == b.bytes) continue;
      if (a.offset < b.offset + b.bytes && b.offset < a.offset + a.bytes) return false;
    }
  }
  return true;
}

}  // namespace

std::optional<VoteResult> VoteCartesian(const CandidateTable& table, std::uint64_t tuple_cap) {
  if (table.empty()) return std::nullopt;
  const std::size_t nv = table[0].size();
  // Intern keys per variable.
  std::vector<std::map<std::string, std::uint32_t>> ids(nv);
  std::vector<std::vector<const Candidate*>> by_id(nv);
  for (const auto& per_file : table) {
    if (per_file.size() != nv) throw std::invalid_argument("candidate table is ragged");
    for (std::size_t v = 0; v < nv; ++v) {
      for (const Candidate& c : per_file[v]) {
        auto [it, inserted] = ids[v].emplace(c.key, static_cast<std::uint32_t>(by_id[v].size()));
        if (inserted) by_id[v].push_back(&c);
      }
    }
  }
  std::uint64_t tuples = 0;
  for (const auto& per_file : table) {
    std::uint64_t n = 1;
    for (const auto& cands : per_file) {
      n *= cands.size();
      if (n > tuple_cap) return std::nullopt;
    }
    tuples += n;
  }
  std::unordered_map<std::vector<std::uint32_t>, std::uint64_t, TupleHash> votes;
  for (const auto& per_file : table) {
    std::vector<std::vector<std::uint32_t>> lists(nv);
    bool empty = false;
    for (std::size_t v = 0; v < nv; ++v) {
      std::set<std::uint32_t> uniq;
      for (const Candidate& c : per_file[v]) uniq.insert(ids[v].at(c.key));
      lists[v].assign(uniq.begin(), uniq.end());
      if (lists[v].empty()) empty = true;
    }
    if (empty) continue;
    std::vector<std::size_t> pos(nv, 0);
    std::vector<std::uint32_t> tuple(nv);
    while (true) {
      for (std::size_t v = 0; v < nv; ++v) tuple[v] = lists[v][pos[v]];
      ++votes[tuple];
      std::size_t v = 0;
      for (; v < nv; ++v) {
        if (++pos[v] < lists[v].size()) break;
        pos[v] = 0;
      }
      if (v == nv) break;
    }
  }
  if (votes.empty()) return std::nullopt;
  const std::vector<std::uint32_t>* best = nullptr;
  TupleRank best_rank;
  bool best_consistent = false;
  std::vector<const Candidate*> cands(nv);
  for (const auto& [tuple, count] : votes) {
    for (std::size_t v = 0; v < nv; ++v) cands[v] = by_id[v][tuple[v]];
    const bool consistent = LayoutConsistent(cands);
    if (best_consistent && !consistent) continue;
    TupleRank rank = RankOf(cands, count);
    if (best == nullptr || (consistent && !best_consistent) || Better(rank, best_rank)) {
      best = &tuple;
      best_rank = std::move(rank);
      best_consistent = consistent;
    }
  }
  VoteResult result;
  result.votes = best_rank.votes;
  result.tuples = tuples;
  for (std::size_t v = 0; v < nv; ++v) result.keys.push_back(by_id[v][(*best)[v]]->key);
  Finish(table, result);
  return result;
}

AssignResult ConsistentAssignment(AssignVariant variant, const AssignProblem& problem) {
  CheckProblem(problem);
  switch (variant) {
    case AssignVariant::kSimplest: return Simplest(problem);
    case AssignVariant::kConceptual: return Conceptual(problem);
    case AssignVariant::kOptimized: return Optimized(problem);
  }
  return Optimized(problem);
}

VoteResult VoteGreedy(const CandidateTable& table, AssignVariant variant) {
  VoteResult result;
  if (table.empty()) return result;
  const std::size_t nv = table[0].size();
  std::set<std::string> keys;
  for (const auto& per_file : table) {
    for (const auto& cands : per_file) {
      for (const Candidate& c : cands) keys.insert(c.key);
    }
  }
  AssignProblem p;
  p.files = table.size();
  p.variables = nv;
  p.expressions.assign(keys.begin(), keys.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t e = 0; e < p.expressions.size(); ++e) index[p.expressions[e]] = e;
  p.weights.assign(nv, std::vector<std::vector<std::uint32_t>>(
                           p.expressions.size(), std::vector<std::uint32_t>(p.files, 0)));
  for (std::size_t f = 0; f < table.size(); ++f) {
    for (std::size_t v = 0; v < nv; ++v) {
      for (const Candidate& c : table[f][v]) p.weights[v][index[c.key]][f] = 1;
    }
  }
  AssignResult a = ConsistentAssignment(variant, p);
  result.keys.assign(nv, std::string());
  std::vector<bool> have(nv, false);
  for (const auto& [v, e] : a.assignments) {
    result.keys[v] = p.expressions[e];
    have[v] = true;
  }
  // Variables no compatible file defines take the first candidate of the
  // first compatible file.
  std::size_t anchor = a.compatible.empty() ? 0 : a.compatible[0];
  for (std::size_t v = 0; v < nv; ++v) {
    if (!have[v] && !table[anchor][v].empty()) result.keys[v] = table[anchor][v][0].key;
  }
  Finish(table, result);
  result.votes = result.supporters.size();
  return result;
}

GeneralizeResult GeneralizeGroup(std::span<const GroupExample> group,
                                 const GeneralizeOptions& options) {
  if (group.empty()) throw std::invalid_argument("empty generalization group");
  const std::string skeleton = SkeletonKey(*group[0].program);
  for (const GroupExample& ex : group) {
    if (SkeletonKey(*ex.program) != skeleton) {
      throw std::invalid_argument("programs in a group must share a skeleton");
    }
  }
  GeneralizeResult result;
  std::vector<SymbolEnv> envs;
  for (const GroupExample& ex : group) envs.push_back(ConcreteEnv(*ex.program));

  // Rewrites.
  const std::vector<RewriteVar> rvars = RewriteVariables(*group[0].program);
  CandidateTable rtable(group.size());
  for (std::size_t f = 0; f < group.size(); ++f) {
    for (const RewriteVar& rv : rvars) {
      SymbolEnv scope;
      for (const std::string& s : rv.scope) scope[s] = envs[f].at(s);
      rtable[f].push_back(EnumerateRewrites(envs[f].at(rv.symbol), scope));
    }
  }
  VoteResult rvote = Vote(rtable, options, &result.fallback);

  // Header bindings over the files that agree with the rewrites.
  const std::vector<std::string> bvars = BindingVariables(*group[0].program);
  BindOptions bind{options.header_size};
  CandidateTable btable;
  for (std::size_t f : rvote.supporters) {
    auto& row = btable.emplace_back();
    for (const std::string& s : bvars) {
      row.push_back(EnumerateBindings(*group[f].program, s, group[f].file, envs[f], bind));
    }
  }
  VoteResult bvote = Vote(btable, options, &result.fallback);
  if (bvote.supporters.empty()) {
    throw std::logic_error("voting produced no supporting file");
  }
  const std::size_t exemplar = rvote.supporters[bvote.supporters[0]];

  // Assemble: per nest, bound bindings, rewrites, then the input base.
  IrProgram prog = *group[exemplar].program;
  prog.defs.clear();
  std::map<std::string, Definition> chosen;
  auto pick = [&](const CandidateTable& table, const VoteResult& vote, std::size_t row,
                  const std::vector<std::string>& symbols) {
    for (std::size_t v = 0; v < symbols.size(); ++v) {
      for (const Candidate& c : table[row][v]) {
        if (c.key != vote.keys[v] || !c.def) continue;
        Definition d = *c.def;
        d.symbol = symbols[v];
        chosen[d.symbol] = std::move(d);
        break;
      }
    }
  };
  std::vector<std::string> rsyms;
  for (const RewriteVar& rv : rvars) rsyms.push_back(rv.symbol);
  pick(rtable, rvote, exemplar, rsyms);
  pick(btable, bvote, bvote.supporters[0], bvars);
  auto emit = [&](const std::string& s) {
    auto it = chosen.find(s);
    if (it != chosen.end()) prog.defs.push_back(it->second);
  };
  for (std::size_t k = 0; k < prog.nests.size(); ++k) {
    for (std::size_t l = 0; l < prog.nests[k].levels.size(); ++l) emit(BoundSymbol(k, l));
    for (const RewriteVar& rv : rvars) {
      if (rv.nest == k) emit(rv.symbol);
    }
    emit(MinYSymbol(k));
  }

  for (const std::string& s : bvars) {
    if (chosen.count(s)) continue;
    for (const SymbolEnv& env : envs) {
      if (env.at(s) != envs[0].at(s)) {
        result.header_limited = true;
        break;
      }
    }
  }

  for (std::size_t f = 0; f < group.size(); ++f) {
    if (Reproduces(prog, group[f])) result.supporters.push_back(f);
  }
  if (result.supporters.empty()) {
    prog = *group[0].program;
    for (std::size_t f = 0; f < group.size(); ++f) {
      if (Reproduces(prog, group[f])) result.supporters.push_back(f);
    }
  }
  result.program = std::move(prog);
  return result;
}

std::vector<std::uint32_t> HeaderSizeSchedule(std::uint32_t start, std::uint32_t cap) {
  if (start == 0) start = 1;
  std::vector<std::uint32_t> out;
  for (std::uint64_t s = start; s <= cap; s *= 2) out.push_back(static_cast<std::uint32_t>(s));
  if (out.empty()) out.push_back(cap);
  return out;
}

}  // namespace parsegen
