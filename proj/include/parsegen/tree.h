// Decision trees of byte-equality predicates with generalized parsers at the
// leaves, and the loop that acquires trace logs until a corpus parses.

#ifndef PARSEGEN_TREE_H_
#define PARSEGEN_TREE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parsegen/generalize.h"
#include "parsegen/ir.h"
#include "parsegen/trace.h"

namespace parsegen {

struct Predicate {
  std::uint32_t index = 0;
  std::uint8_t value = 0;
  // Files too short to hold the byte do not satisfy the predicate.
  bool Eval(std::span<const std::uint8_t> file) const {
    return index < file.size() && file[index] == value;
  }
  std::string ToString() const;
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// A leaf (no predicate) holds a parser or nothing; a node holds a predicate
// and two subtrees.
struct ParserTree {
  std::optional<Predicate> predicate;
  std::shared_ptr<const IrProgram> parser;
  std::shared_ptr<const ParserTree> sat, unsat;

  static ParserTree Leaf(std::shared_ptr<const IrProgram> parser);
  static ParserTree Node(const Predicate& p, ParserTree sat, ParserTree unsat);
  bool is_leaf() const { return !predicate.has_value(); }
  const ParserTree& Route(std::span<const std::uint8_t> file) const;
};

// Leaves in depth-first order, true branch first.
std::vector<const ParserTree*> Leaves(const ParserTree& tree);
std::vector<Predicate> Predicates(const ParserTree& tree);

class HeaderSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A training file: raw bytes and the reference output (nullopt when the
// reference parser rejects the file).
struct CorpusEntry {
  std::string name;
  std::vector<std::uint8_t> bytes;
  std::optional<OutputBuffers> expected;
};

struct Verdict {
  enum class Kind { kExact, kMismatch, kError, kRejected };
  Kind kind = Kind::kRejected;
  std::string array;        // kMismatch
  std::int64_t offset = 0;  // kMismatch: first differing byte
  std::string error;        // kError: error kind name
  std::size_t leaf = 0;     // index into Leaves()
};

std::string_view VerdictKindName(Verdict::Kind kind);

struct ParseReport {
  std::vector<Verdict> verdicts;  // per corpus entry
  std::vector<std::size_t> parseable;
  std::vector<std::size_t> unparseable;
};

// Runs one program and compares against the expected output.
Verdict CheckProgram(const IrProgram& program, const CorpusEntry& entry);
ParseReport TestParser(const ParserTree& tree, std::span<const CorpusEntry> corpus);

// Exact frequency-difference scoring over bytes [0, header_size).
// Both sets must be non-empty.
Predicate PickAHew(std::span<const std::span<const std::uint8_t>> good,
                   std::span<const std::span<const std::uint8_t>> bad,
                   std::uint32_t header_size);

struct TreeOptions {
  std::uint32_t header_size = 32;
  GeneralizeOptions generalize;
};

struct TreeStats {
  bool header_limited = false;  // some leaf parser left a varying constant literal
  std::size_t generalizations = 0;
};

// Builds trees over a corpus from a growing set of per-file summarized
// programs. Group generalizations are cached across builds.
class TreeBuilder {
 public:
  explicit TreeBuilder(std::span<const CorpusEntry> corpus) : corpus_(corpus) {}

  // `programs` maps a corpus index to the program summarized from its log.
  // Throws HeaderSizeError when no predicate within the header splits a node.
  ParserTree Build(std::span<const std::size_t> examples,
                   const std::map<std::size_t, IrProgram>& programs, const TreeOptions& options,
                   TreeStats* stats = nullptr);

 private:
  struct Indiv {
    std::shared_ptr<const IrProgram> parser;
    bool header_limited = false;
  };
  Indiv BuildIndivParser(std::span<const std::size_t> examples,
                         const std::map<std::size_t, IrProgram>& programs,
                         const TreeOptions& options, TreeStats* stats);
  ParserTree Recurse(std::vector<std::size_t> examples,
                     const std::map<std::size_t, IrProgram>& programs,
                     const TreeOptions& options, TreeStats* stats);

  std::span<const CorpusEntry> corpus_;
  std::map<std::string, GeneralizeResult> cache_;
  std::map<std::pair<const IrProgram*, std::size_t>, bool> parses_;
};

enum class Strategy { kSmallest, kLargest, kRandom };
std::string_view StrategyName(Strategy s);
Strategy ParseStrategy(std::string_view name);

struct ExpandOptions {
  std::size_t batch = 10;
  Strategy strategy = Strategy::kSmallest;
  std::uint64_t seed = 1;
  std::uint32_t header_start = 32;
  std::uint32_t header_cap = 1024;
  unsigned max_stride = 8;
  GeneralizeOptions generalize;
  std::size_t max_rounds = 1000;
};

struct RoundReport {
  std::size_t round = 0;
  std::size_t logs_acquired = 0;
  std::size_t unparseable = 0;  // after the round
  std::uint64_t traced_bytes = 0;  // input bytes traced this round
  std::uint32_t header_size = 0;
};

struct ExpandResult {
  ParserTree tree;
  std::map<std::size_t, IrProgram> programs;  // by corpus index
  std::map<std::size_t, TraceLog> logs;
  std::vector<RoundReport> rounds;
  std::uint32_t header_size = 0;
  std::uint64_t traced_bytes = 0;
  ParseReport report;
  bool converged = false;
  std::string diagnostic;
};

// Produces the trace log for corpus entry i.
using Tracer = std::function<TraceLog(std::size_t)>;

ExpandResult ExpandLogsUntilConverged(std::span<const CorpusEntry> corpus, const Tracer& tracer,
                                      const ExpandOptions& options);

// Graphviz text. `counts`, when given, holds files routed to each leaf.
std::string ExportDot(const ParserTree& tree, const std::vector<std::size_t>* counts = nullptr);

// One-line description of a leaf parser.
std::string ParserSummary(const IrProgram& program);

}  // namespace parsegen

#endif  // PARSEGEN_TREE_H_
