#include "parsegen/cli.h"

#include <algorithm>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "parsegen/emit.h"
#include "parsegen/interp.h"

namespace parsegen {

namespace fs = std::filesystem;

namespace {

Json SizesJson(const SizeRange& s) {
  return {{"min_dim", s.min_dim},         {"max_dim", s.max_dim},     {"min_samples", s.min_samples},
          {"max_samples", s.max_samples}, {"min_chunk", s.min_chunk}, {"max_chunk", s.max_chunk}};
}

fs::path TreePath(const RunConfig& c) {
  return c.tree_path.empty() ? fs::path(c.out_dir) / "tree.json" : fs::path(c.tree_path);
}

void SaveConfig(const RunConfig& c) { WriteTextFile(fs::path(c.out_dir) / "config.json", ToJson(c).dump(2) + "\n"); }

// Files of `corpus` that parse exactly at each leaf.
std::vector<std::size_t> LeafCounts(const ParserTree& tree, const ParseReport& report) {
  std::vector<std::size_t> counts(Leaves(tree).size(), 0);
  for (const Verdict& v : report.verdicts) {
    if (v.kind == Verdict::Kind::kExact && v.leaf < counts.size()) ++counts[v.leaf];
  }
  return counts;
}

std::string RoundTable(const std::vector<RoundReport>& rounds) {
  std::ostringstream s;
  s << "round logs_acquired unparseable traced_bytes header_size\n";
  for (const RoundReport& r : rounds) {
    s << r.round << " " << r.logs_acquired << " " << r.unparseable << " " << r.traced_bytes << " "
      << r.header_size << "\n";
  }
  return s.str();
}

std::string TypeOf(const std::string& name, const Manifest& m) {
  for (const ManifestEntry& e : m.files) {
    if (e.name == name) return e.type;
  }
  return "?";
}

ParserTree LoadTree(const RunConfig& c) {
  fs::path p = TreePath(c);
  if (!fs::exists(p)) throw FormatError("no tree at " + p.string());
  try {
    return TreeFromJson(Json::parse(ReadTextFile(p)));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed tree: ") + e.what());
  }
}

}  // namespace

std::string_view VotingModeName(VotingMode m) {
  switch (m) {
    case VotingMode::kCartesian: return "cartesian";
    case VotingMode::kSimplest: return "simplest";
    case VotingMode::kConceptual: return "conceptual";
    case VotingMode::kOptimized: return "optimized";
  }
  return "?";
}

VotingMode ParseVotingMode(std::string_view name) {
  for (VotingMode m : {VotingMode::kCartesian, VotingMode::kSimplest, VotingMode::kConceptual,
                       VotingMode::kOptimized}) {
    if (VotingModeName(m) == name) return m;
  }
  throw std::invalid_argument("unknown voting mode: " + std::string(name));
}

Json ToJson(const RunConfig& c) {
  return {{"corpus_dir", c.corpus_dir},
          {"out_dir", c.out_dir},
          {"seed", c.seed},
          {"formats", c.formats},
          {"count", c.count},
          {"sizes", SizesJson(c.sizes)},
          {"batch", c.batch},
          {"strategy", StrategyName(c.strategy)},
          {"header_start", c.header_start},
          {"header_cap", c.header_cap},
          {"max_stride", c.max_stride},
          {"voting", VotingModeName(c.voting)},
          {"tuple_cap", c.tuple_cap},
          {"split", c.split},
          {"repeats", c.repeats},
          {"tree_path", c.tree_path},
          {"partial", c.partial},
          {"verify", c.verify}};
}

RunConfig ConfigFromJson(const Json& j) {
  RunConfig c;
  try {
    c.corpus_dir = j.value("corpus_dir", c.corpus_dir);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.seed = j.value("seed", c.seed);
    c.formats = j.value("formats", c.formats);
    c.count = j.value("count", c.count);
    if (j.contains("sizes")) {
      const Json& s = j.at("sizes");
      c.sizes.min_dim = s.value("min_dim", c.sizes.min_dim);
      c.sizes.max_dim = s.value("max_dim", c.sizes.max_dim);
      c.sizes.min_samples = s.value("min_samples", c.sizes.min_samples);
      c.sizes.max_samples = s.value("max_samples", c.sizes.max_samples);
      c.sizes.min_chunk = s.value("min_chunk", c.sizes.min_chunk);
      c.sizes.max_chunk = s.value("max_chunk", c.sizes.max_chunk);
    }
    c.batch = j.value("batch", c.batch);
    c.strategy = ParseStrategy(j.value("strategy", std::string(StrategyName(c.strategy))));
    c.header_start = j.value("header_start", c.header_start);
    c.header_cap = j.value("header_cap", c.header_cap);
    c.max_stride = j.value("max_stride", c.max_stride);
    c.voting = ParseVotingMode(j.value("voting", std::string(VotingModeName(c.voting))));
    c.tuple_cap = j.value("tuple_cap", c.tuple_cap);
    c.split = j.value("split", c.split);
    c.repeats = j.value("repeats", c.repeats);
    c.tree_path = j.value("tree_path", c.tree_path);
    c.partial = j.value("partial", c.partial);
    c.verify = j.value("verify", c.verify);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed config: ") + e.what());
  }
  return c;
}

const std::vector<std::string>& AllTypeTokens() {
  static const std::vector<std::string> tokens = [] {
    std::vector<std::string> out;
    for (const char* t : {"wav-m8", "wav-m16", "wav-s8", "wav-s16", "bmp16", "bmp16-td", "bmp16-v5-565",
                          "bmp24", "bmp24-td", "bmp32", "bmp32-td", "bmp32-v4-rgba", "bmp32-v5-rgba-td",
                          "fwc"}) {
      out.push_back(TypeToken(ParseTypeToken(t)));
    }
    return out;
  }();
  return tokens;
}

ExpandOptions ExpandOptionsFor(const RunConfig& c) {
  ExpandOptions o;
  o.batch = c.batch;
  o.strategy = c.strategy;
  o.seed = c.seed;
  o.header_start = c.header_start;
  o.header_cap = c.header_cap;
  o.max_stride = c.max_stride;
  o.generalize.voting = c.voting;
  o.generalize.tuple_cap = c.tuple_cap;
  return o;
}

std::vector<CorpusEntry> LoadCorpus(const fs::path& corpus_dir, Manifest* manifest) {
  fs::path mpath = corpus_dir / "manifest.json";
  if (!fs::exists(mpath)) throw FormatError("no manifest at " + mpath.string());
  Manifest m = ManifestFromJson(Json::parse(ReadTextFile(mpath)));
  std::vector<CorpusEntry> corpus;
  for (const ManifestEntry& e : m.files) {
    CorpusEntry c;
    c.name = e.name;
    c.bytes = ReadBinaryFile(corpus_dir / e.name);
    try {
      c.expected = OracleParse(c.bytes);
    } catch (const OracleError&) {
    }
    corpus.push_back(std::move(c));
  }
  if (manifest) *manifest = std::move(m);
  return corpus;
}

int CmdGenCorpus(const RunConfig& config) {
  std::vector<std::string> tokens;
  for (const std::string& f : config.formats) {
    if (f == "all") {
      tokens.insert(tokens.end(), AllTypeTokens().begin(), AllTypeTokens().end());
    } else {
      tokens.push_back(f);
    }
  }
  if (tokens.empty()) {
    std::cerr << "gen-corpus: no formats given\n";
    return kExitUsage;
  }
  Lcg rng(config.seed);
  std::vector<FormatSpec> specs;
  for (const std::string& t : tokens) {
    for (std::size_t i = 0; i < config.count; ++i) specs.push_back(RandomSpec(t, rng, config.sizes));
  }
  std::vector<CorpusFile> files = GenCorpus(specs, config.seed);
  Manifest m;
  m.seed = config.seed;
  const fs::path dir(config.corpus_dir);
  for (const CorpusFile& f : files) {
    WriteBinaryFile(dir / f.name, f.bytes);
    m.files.push_back({f.name, TypeToken(f.spec), f.spec, f.bytes.size()});
  }
  WriteTextFile(dir / "manifest.json", ToJson(m).dump(2) + "\n");
  std::cout << "wrote " << files.size() << " files to " << dir.string() << "\n";
  return kExitOk;
}

int CmdInfer(const RunConfig& config) {
  Manifest manifest;
  std::vector<CorpusEntry> corpus = LoadCorpus(config.corpus_dir, &manifest);
  SaveConfig(config);
  ExpandResult r = ExpandLogsUntilConverged(
      corpus, [&](std::size_t i) { return TracedParse(corpus[i].bytes, corpus[i].name).log; },
      ExpandOptionsFor(config));

  const fs::path out(config.out_dir);
  WriteTextFile(out / "tree.json", ToJson(r.tree).dump(1) + "\n");
  std::vector<std::size_t> counts = LeafCounts(r.tree, r.report);
  WriteTextFile(out / "tree.dot", ExportDot(r.tree, &counts));
  std::vector<const ParserTree*> leaves = Leaves(r.tree);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (!leaves[i]->parser) continue;
    const std::string stem = "leaf" + std::to_string(i);
    WriteTextFile(out / "leaves" / (stem + ".ir"), ProgramText(*leaves[i]->parser));
    WriteTextFile(out / "leaves" / (stem + ".json"), ToJson(*leaves[i]->parser).dump(1) + "\n");
  }
  for (const auto& [idx, log] : r.logs) {
    WriteTextFile(out / "logs" / (corpus[idx].name + ".trace"), SerializeTrace(log));
  }
  WriteTextFile(out / "rounds.txt", RoundTable(r.rounds));

  Json report = {{"converged", r.converged},
                 {"diagnostic", r.diagnostic},
                 {"header_size", r.header_size},
                 {"traced_bytes", r.traced_bytes},
                 {"leaves", leaves.size()},
                 {"files", corpus.size()},
                 {"parseable", r.report.parseable.size()},
                 {"rounds", Json::array()},
                 {"verdicts", Json::array()}};
  for (const RoundReport& rr : r.rounds) report["rounds"].push_back(ToJson(rr));
  // No verdicts when no tree could be built.
  for (std::size_t i = 0; i < r.report.verdicts.size(); ++i) {
    const Verdict& v = r.report.verdicts[i];
    Json jv = {{"file", corpus[i].name}, {"type", TypeOf(corpus[i].name, manifest)},
               {"kind", VerdictKindName(v.kind)}, {"leaf", v.leaf}};
    if (v.kind == Verdict::Kind::kMismatch) {
      jv["array"] = v.array;
      jv["offset"] = v.offset;
    }
    if (v.kind == Verdict::Kind::kError) jv["error"] = v.error;
    report["verdicts"].push_back(jv);
  }
  WriteTextFile(out / "report.json", report.dump(1) + "\n");

  std::cout << RoundTable(r.rounds);
  std::cout << "leaves " << leaves.size() << ", parseable " << r.report.parseable.size() << "/"
            << corpus.size() << ", traced bytes " << r.traced_bytes << ", header " << r.header_size << "\n";
  if (!r.converged) {
    std::cerr << "infer: did not converge: " << r.diagnostic << "\n";
    return kExitNoConvergence;
  }
  for (const Verdict& v : r.report.verdicts) {
    if (v.kind == Verdict::Kind::kMismatch || v.kind == Verdict::Kind::kError) return kExitMismatch;
  }
  return kExitOk;
}

std::vector<EvalRepeat> EvaluateSplits(std::span<const CorpusEntry> corpus,
                                       const std::vector<std::string>& types, const RunConfig& config) {
  std::vector<EvalRepeat> out;
  std::mt19937_64 rng(config.seed);
  const std::size_t n = corpus.size();
  const std::size_t train_n = std::clamp<std::size_t>(
      static_cast<std::size_t>(config.split * static_cast<double>(n) + 0.5), 1, n);
  for (std::size_t rep = 0; rep < config.repeats; ++rep) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    EvalRepeat e;
    e.repeat = rep;
    e.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_n));
    e.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_n), order.end());
    std::sort(e.train.begin(), e.train.end());
    std::sort(e.test.begin(), e.test.end());

    std::vector<CorpusEntry> train, test;
    for (std::size_t i : e.train) train.push_back(corpus[i]);
    for (std::size_t i : e.test) test.push_back(corpus[i]);
    ExpandResult r = ExpandLogsUntilConverged(
        train, [&](std::size_t i) { return TracedParse(train[i].bytes, train[i].name).log; },
        ExpandOptionsFor(config));
    e.converged = r.converged;
    e.train_accuracy = train.empty() ? 1.0 : double(r.report.parseable.size()) / double(train.size());
    ParseReport tr = TestParser(r.tree, test);
    e.test_accuracy = test.empty() ? 1.0 : double(tr.parseable.size()) / double(test.size());
    for (std::size_t k : tr.unparseable) e.failures.push_back(e.test[k]);

    std::set<std::string> trained;
    for (std::size_t i : e.train) trained.insert(types[i]);
    std::set<std::string> missing;
    for (std::size_t i : e.test) {
      if (!trained.count(types[i])) missing.insert(types[i]);
    }
    e.missing_types.assign(missing.begin(), missing.end());
    out.push_back(std::move(e));
  }
  return out;
}

int CmdEval(const RunConfig& config) {
  if (config.split <= 0 || config.split > 1 || config.repeats == 0) {
    std::cerr << "eval: split must be in (0, 1] and repeats positive\n";
    return kExitUsage;
  }
  Manifest manifest;
  std::vector<CorpusEntry> corpus = LoadCorpus(config.corpus_dir, &manifest);
  SaveConfig(config);
  std::vector<std::string> types;
  for (const CorpusEntry& c : corpus) types.push_back(TypeOf(c.name, manifest));
  std::vector<EvalRepeat> reps = EvaluateSplits(corpus, types, config);

  Json j = {{"repeats", Json::array()}};
  double sum = 0, lo = 1, hi = 0;
  std::ostringstream text;
  text << "repeat train test converged train_acc test_acc failures missing_types\n";
  for (const EvalRepeat& e : reps) {
    Json failures = Json::array();
    std::string failed;
    for (std::size_t i : e.failures) {
      failures.push_back({{"file", corpus[i].name}, {"type", types[i]}});
      failed += (failed.empty() ? "" : ",") + corpus[i].name;
    }
    j["repeats"].push_back({{"repeat", e.repeat},
                            {"train", e.train.size()},
                            {"test", e.test.size()},
                            {"converged", e.converged},
                            {"train_accuracy", e.train_accuracy},
                            {"test_accuracy", e.test_accuracy},
                            {"failures", failures},
                            {"missing_types", e.missing_types}});
    sum += e.test_accuracy;
    lo = std::min(lo, e.test_accuracy);
    hi = std::max(hi, e.test_accuracy);
    std::string missing;
    for (const std::string& t : e.missing_types) missing += (missing.empty() ? "" : ",") + t;
    text << e.repeat << " " << e.train.size() << " " << e.test.size() << " " << e.converged << " "
         << e.train_accuracy << " " << e.test_accuracy << " " << (failed.empty() ? "-" : failed) << " "
         << (missing.empty() ? "-" : missing) << "\n";
  }
  const double mean = sum / double(reps.size());
  j["summary"] = {{"mean", mean}, {"min", lo}, {"max", hi}};
  text << "test accuracy mean " << mean << " min " << lo << " max " << hi << "\n";
  WriteTextFile(fs::path(config.out_dir) / "eval.json", j.dump(1) + "\n");
  WriteTextFile(fs::path(config.out_dir) / "eval.txt", text.str());
  std::cout << text.str();
  return kExitOk;
}

int CmdEmit(const RunConfig& config) {
  ParserTree tree;
  try {
    tree = LoadTree(config);
  } catch (const FormatError& e) {
    std::cerr << "emit: " << e.what() << "\n";
    return kExitUsage;
  }
  EmitOptions eo;
  eo.partial = config.partial;
  std::string source;
  try {
    source = EmitSource(tree, eo);
  } catch (const EmitError& e) {
    std::cerr << "emit: " << e.what() << "\n";
    return kExitUsage;
  }
  const fs::path out(config.out_dir);
  WriteTextFile(out / "parser.c", source);
  std::vector<std::string> findings = ScanEmitted(source);
  for (const std::string& f : findings) std::cerr << "scan: " << f << "\n";
  std::cout << "wrote " << (out / "parser.c").string() << "\n";
  if (!findings.empty()) return kExitMismatch;
  if (!config.verify) return kExitOk;

  std::vector<CorpusEntry> corpus = LoadCorpus(config.corpus_dir);
  EmitVerifyReport v = VerifyEmitted(source, tree, corpus, (out / "verify").string());
  if (v.skipped) {
    std::cout << "verify: skipped, no C compiler found\n";
    return kExitOk;
  }
  if (!v.compiled) {
    std::cerr << "verify: compile failed\n" << v.diagnostics;
    return kExitMismatch;
  }
  std::cout << "verify: " << v.identical << "/" << v.files << " identical\n";
  for (const std::string& f : v.failures) std::cerr << "verify: " << f << "\n";
  return v.failures.empty() ? kExitOk : kExitMismatch;
}

int CmdViz(const RunConfig& config) {
  ParserTree tree;
  try {
    tree = LoadTree(config);
  } catch (const FormatError& e) {
    std::cerr << "viz: " << e.what() << "\n";
    return kExitUsage;
  }
  std::string dot;
  if (fs::exists(fs::path(config.corpus_dir) / "manifest.json")) {
    std::vector<CorpusEntry> corpus = LoadCorpus(config.corpus_dir);
    std::vector<std::size_t> counts = LeafCounts(tree, TestParser(tree, corpus));
    dot = ExportDot(tree, &counts);
  } else {
    dot = ExportDot(tree);
  }
  WriteTextFile(fs::path(config.out_dir) / "tree.dot", dot);
  std::cout << "wrote " << (fs::path(config.out_dir) / "tree.dot").string() << "\n";
  return kExitOk;
}

}  // namespace parsegen
