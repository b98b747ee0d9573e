#include "parsegen/tree.h"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "parsegen/interp.h"
#include "parsegen/loops.h"

namespace parsegen {

std::string Predicate::ToString() const {
  return "in[" + std::to_string(index) + "] == " + std::to_string(value);
}

ParserTree ParserTree::Leaf(std::shared_ptr<const IrProgram> parser) {
  ParserTree t;
  t.parser = std::move(parser);
  return t;
}

ParserTree ParserTree::Node(const Predicate& p, ParserTree sat, ParserTree unsat) {
  ParserTree t;
  t.predicate = p;
  t.sat = std::make_shared<const ParserTree>(std::move(sat));
  t.unsat = std::make_shared<const ParserTree>(std::move(unsat));
  return t;
}

const ParserTree& ParserTree::Route(std::span<const std::uint8_t> file) const {
  const ParserTree* t = this;
  while (!t->is_leaf()) t = t->predicate->Eval(file) ? t->sat.get() : t->unsat.get();
  return *t;
}

namespace {

void CollectLeaves(const ParserTree& t, std::vector<const ParserTree*>& out) {
  if (t.is_leaf()) {
    out.push_back(&t);
    return;
  }
  CollectLeaves(*t.sat, out);
  CollectLeaves(*t.unsat, out);
}

void CollectPredicates(const ParserTree& t, std::vector<Predicate>& out) {
  if (t.is_leaf()) return;
  out.push_back(*t.predicate);
  CollectPredicates(*t.sat, out);
  CollectPredicates(*t.unsat, out);
}

std::string DotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::vector<const ParserTree*> Leaves(const ParserTree& tree) {
  std::vector<const ParserTree*> out;
  CollectLeaves(tree, out);
  return out;
}

std::vector<Predicate> Predicates(const ParserTree& tree) {
  std::vector<Predicate> out;
  CollectPredicates(tree, out);
  return out;
}

std::string_view VerdictKindName(Verdict::Kind kind) {
  switch (kind) {
    case Verdict::Kind::kExact: return "exact";
    case Verdict::Kind::kMismatch: return "mismatch";
    case Verdict::Kind::kError: return "error";
    case Verdict::Kind::kRejected: return "rejected";
  }
  return "?";
}

Verdict CheckProgram(const IrProgram& program, const CorpusEntry& entry) {
  Verdict v;
  if (!entry.expected) {
    v.kind = Verdict::Kind::kError;
    v.error = "oracle-rejected";
    return v;
  }
  OutputBuffers got;
  try {
    got = Interpret(program, entry.bytes);
  } catch (const InterpError& e) {
    v.kind = Verdict::Kind::kError;
    v.error = std::string(InterpErrorKindName(e.kind()));
    return v;
  }
  const OutputBuffers& want = *entry.expected;
  std::set<std::string> names;
  for (const auto& [k, _] : want) names.insert(k);
  for (const auto& [k, _] : got) names.insert(k);
  for (const std::string& name : names) {
    auto w = want.find(name);
    auto g = got.find(name);
    if (w == want.end() || g == got.end()) {
      v.kind = Verdict::Kind::kMismatch;
      v.array = name;
      v.offset = 0;
      return v;
    }
    const auto& a = w->second;
    const auto& b = g->second;
    if (a == b) continue;
    auto diff = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
    v.kind = Verdict::Kind::kMismatch;
    v.array = name;
    v.offset = diff.first - a.begin();
    return v;
  }
  v.kind = Verdict::Kind::kExact;
  return v;
}

ParseReport TestParser(const ParserTree& tree, std::span<const CorpusEntry> corpus) {
  ParseReport r;
  std::unordered_map<const ParserTree*, std::size_t> leaf_index;
  auto leaves = Leaves(tree);
  for (std::size_t i = 0; i < leaves.size(); ++i) leaf_index[leaves[i]] = i;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const ParserTree& leaf = tree.Route(corpus[i].bytes);
    Verdict v;
    if (leaf.parser) v = CheckProgram(*leaf.parser, corpus[i]);
    v.leaf = leaf_index.at(&leaf);
    (v.kind == Verdict::Kind::kExact ? r.parseable : r.unparseable).push_back(i);
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

Predicate PickAHew(std::span<const std::span<const std::uint8_t>> good,
                   std::span<const std::span<const std::uint8_t>> bad,
                   std::uint32_t header_size) {
  // freq = g/|good| - b/|bad|, compared as |g*|bad| - b*|good||.
  const auto ng = static_cast<std::int64_t>(good.size());
  const auto nb = static_cast<std::int64_t>(bad.size());
  Predicate best;
  std::int64_t best_score = -1;
  for (std::uint32_t i = 0; i < header_size; ++i) {
    std::int64_t cg[256] = {}, cb[256] = {};
    bool any = false;
    for (auto f : good) {
      if (i < f.size()) ++cg[f[i]], any = true;
    }
    for (auto f : bad) {
      if (i < f.size()) ++cb[f[i]], any = true;
    }
    if (!any) continue;
    for (int v = 0; v < 256; ++v) {
      if (cg[v] == 0 && cb[v] == 0) continue;
      std::int64_t score = cg[v] * nb - cb[v] * ng;
      if (score < 0) score = -score;
      if (score > best_score) {
        best_score = score;
        best = {i, static_cast<std::uint8_t>(v)};
      }
    }
  }
  return best;
}

ParserTree TreeBuilder::Build(std::span<const std::size_t> examples,
                              const std::map<std::size_t, IrProgram>& programs,
                              const TreeOptions& options, TreeStats* stats) {
  std::vector<std::size_t> ex(examples.begin(), examples.end());
  std::sort(ex.begin(), ex.end());
  ex.erase(std::unique(ex.begin(), ex.end()), ex.end());
  return Recurse(std::move(ex), programs, options, stats);
}

TreeBuilder::Indiv TreeBuilder::BuildIndivParser(std::span<const std::size_t> examples,
                                                 const std::map<std::size_t, IrProgram>& programs,
                                                 const TreeOptions& options, TreeStats* stats) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i : examples) {
    auto it = programs.find(i);
    if (it == programs.end() || !corpus_[i].expected) continue;
    groups[SkeletonKey(it->second)].push_back(i);
  }
  Indiv best;
  std::size_t best_count = 0;
  const GeneralizeOptions& g = options.generalize;
  for (const auto& [skeleton, members] : groups) {
    std::string key = std::to_string(options.header_size) + "/" +
                      std::to_string(static_cast<int>(g.voting)) + "/" +
                      std::to_string(g.tuple_cap) + "/";
    for (std::size_t i : members) key += std::to_string(i) + ",";
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      std::vector<GroupExample> group;
      for (std::size_t i : members) {
        group.push_back({&programs.at(i), corpus_[i].bytes, &*corpus_[i].expected});
      }
      GeneralizeOptions go = g;
      go.header_size = options.header_size;
      GeneralizeResult r = GeneralizeGroup(group, go);
      it = cache_.emplace(key, std::move(r)).first;
      if (stats) ++stats->generalizations;
    }
    auto parser = std::shared_ptr<const IrProgram>(std::shared_ptr<void>(), &it->second.program);
    std::size_t count = 0;
    for (std::size_t i : examples) {
      auto pk = std::make_pair(parser.get(), i);
      auto pit = parses_.find(pk);
      if (pit == parses_.end()) {
        pit = parses_.emplace(pk, CheckProgram(*parser, corpus_[i]).kind == Verdict::Kind::kExact).first;
      }
      count += pit->second;
    }
    if (!best.parser || count > best_count) {
      best.parser = parser;
      best.header_limited = it->second.header_limited;
      best_count = count;
    }
  }
  return best;
}

ParserTree TreeBuilder::Recurse(std::vector<std::size_t> examples,
                                const std::map<std::size_t, IrProgram>& programs,
                                const TreeOptions& options, TreeStats* stats) {
  Indiv indiv = BuildIndivParser(examples, programs, options, stats);
  if (!indiv.parser) return ParserTree::Leaf(nullptr);
  if (stats && indiv.header_limited) stats->header_limited = true;
  std::vector<std::size_t> good, bad;
  for (std::size_t i : examples) {
    (parses_.at({indiv.parser.get(), i}) ? good : bad).push_back(i);
  }
  // Own the cached program so the tree outlives the builder.
  auto parser = std::make_shared<const IrProgram>(*indiv.parser);
  if (bad.empty()) return ParserTree::Leaf(parser);
  if (good.empty()) return ParserTree::Leaf(nullptr);
  std::vector<std::span<const std::uint8_t>> gf, bf;
  for (std::size_t i : good) gf.emplace_back(corpus_[i].bytes);
  for (std::size_t i : bad) bf.emplace_back(corpus_[i].bytes);
  Predicate p = PickAHew(gf, bf, options.header_size);
  std::vector<std::size_t> sat, unsat;
  for (std::size_t i : examples) (p.Eval(corpus_[i].bytes) ? sat : unsat).push_back(i);
  if (sat.empty() || unsat.empty()) {
    throw HeaderSizeError("cannot find a predicate within " + std::to_string(options.header_size) +
                          " header bytes; try a larger header size");
  }
  ParserTree left = Recurse(std::move(sat), programs, options, stats);
  ParserTree right = Recurse(std::move(unsat), programs, options, stats);
  return ParserTree::Node(p, std::move(left), std::move(right));
}

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kSmallest: return "smallest";
    case Strategy::kLargest: return "largest";
    case Strategy::kRandom: return "random";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view name) {
  if (name == "smallest") return Strategy::kSmallest;
  if (name == "largest") return Strategy::kLargest;
  if (name == "random") return Strategy::kRandom;
  throw std::invalid_argument("unknown strategy " + std::string(name));
}

ExpandResult ExpandLogsUntilConverged(std::span<const CorpusEntry> corpus, const Tracer& tracer,
                                      const ExpandOptions& options) {
  ExpandResult res;
  const std::vector<std::uint32_t> schedule =
      HeaderSizeSchedule(options.header_start, options.header_cap);
  std::size_t hs = 0;
  TreeBuilder builder(corpus);
  std::mt19937_64 rng(options.seed);

  std::vector<std::size_t> examples, unparseable;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    examples.push_back(i);
    if (corpus[i].expected) unparseable.push_back(i);
  }
  res.tree = ParserTree::Leaf(nullptr);
  res.header_size = schedule[0];
  std::size_t prev = unparseable.size();

  for (std::size_t round = 1; !unparseable.empty(); ++round) {
    if (round > options.max_rounds) {
      res.diagnostic = "round limit reached";
      return res;
    }
    std::vector<std::size_t> pool;
    for (std::size_t i : unparseable) {
      if (!res.programs.count(i)) pool.push_back(i);
    }
    switch (options.strategy) {
      case Strategy::kSmallest:
      case Strategy::kLargest:
        std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
          return options.strategy == Strategy::kSmallest
                     ? corpus[a].bytes.size() < corpus[b].bytes.size()
                     : corpus[a].bytes.size() > corpus[b].bytes.size();
        });
        break;
      case Strategy::kRandom:
        for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng() % i]);
        break;
    }
    if (pool.size() > options.batch) pool.resize(options.batch);

    RoundReport rr;
    rr.round = round;
    for (std::size_t i : pool) {
      TraceLog log = tracer(i);
      res.programs[i] = SummarizeBest(AbstractTrace(log), options.max_stride);
      res.logs[i] = std::move(log);
      rr.traced_bytes += corpus[i].bytes.size();
    }
    rr.logs_acquired = pool.size();
    res.traced_bytes += rr.traced_bytes;

    while (true) {
      TreeOptions to{schedule[hs], options.generalize};
      TreeStats st;
      try {
        res.tree = builder.Build(examples, res.programs, to, &st);
      } catch (const HeaderSizeError& e) {
        if (hs + 1 < schedule.size()) {
          ++hs;
          continue;
        }
        res.diagnostic = e.what();
        res.header_size = schedule[hs];
        return res;
      }
      if (st.header_limited && hs + 1 < schedule.size()) {
        ++hs;
        continue;
      }
      break;
    }
    res.header_size = schedule[hs];
    res.report = TestParser(res.tree, corpus);
    unparseable.clear();
    for (std::size_t i : res.report.unparseable) {
      if (corpus[i].expected) unparseable.push_back(i);
    }
    rr.unparseable = unparseable.size();
    rr.header_size = schedule[hs];
    res.rounds.push_back(rr);

    if (!unparseable.empty() && (unparseable.size() >= prev || pool.empty())) {
      if (hs + 1 < schedule.size()) {
        ++hs;
      } else {
        res.diagnostic = "no progress at the largest header size (" +
                         std::to_string(schedule[hs]) + " bytes)";
        return res;
      }
    }
    prev = unparseable.size();
  }
  res.converged = true;
  return res;
}

std::string ParserSummary(const IrProgram& p) {
  std::set<std::string> arrays;
  for (const LoopNest& n : p.nests) arrays.insert(n.array);
  std::string out = "stride " + std::to_string(p.stride) + "; ";
  bool first = true;
  for (const std::string& a : arrays) {
    out += (first ? "" : ",") + a;
    first = false;
  }
  out += "; " + std::to_string(p.nests.size()) + " nest" + (p.nests.size() == 1 ? "" : "s");
  out += "; from " + p.file_id;
  return out;
}

std::string ExportDot(const ParserTree& tree, const std::vector<std::size_t>* counts) {
  std::ostringstream out;
  out << "digraph parser {\n  node [shape=box];\n";
  std::size_t next = 0, leaf = 0;
  std::function<std::size_t(const ParserTree&)> walk = [&](const ParserTree& t) {
    std::size_t id = next++;
    if (t.is_leaf()) {
      std::string label = "leaf " + std::to_string(leaf) + "\\n" +
                          (t.parser ? DotEscape(ParserSummary(*t.parser)) : std::string("null"));
      if (counts && leaf < counts->size()) label += "\\nfiles " + std::to_string((*counts)[leaf]);
      ++leaf;
      out << "  n" << id << " [shape=ellipse, label=\"" << label << "\"];\n";
      return id;
    }
    out << "  n" << id << " [label=\"" << t.predicate->ToString() << "\"];\n";
    std::size_t a = walk(*t.sat);
    out << "  n" << id << " -> n" << a << " [label=\"true\"];\n";
    std::size_t b = walk(*t.unsat);
    out << "  n" << id << " -> n" << b << " [label=\"false\"];\n";
    return id;
  };
  walk(tree);
  out << "}\n";
  return out.str();
}

}  // namespace parsegen
