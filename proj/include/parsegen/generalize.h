// Generalization of concrete loop programs: constants become expressions over
// other constants, then reads of header fields, chosen by voting across files.

#ifndef PARSEGEN_GENERALIZE_H_
#define PARSEGEN_GENERALIZE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parsegen/ir.h"
#include "parsegen/trace.h"

namespace parsegen {

// One way to define a variable. A candidate without a definition keeps the
// concrete value (a literal); its key is the value itself.
struct Candidate {
  std::string key;
  std::optional<Definition> def;
  // Preference among equally voted tuples; smaller sums win, in this order.
  int literals = 0;
  int terms = 0;       // header fields read
  int neg_bits = 0;    // minus total field width in bits
  int neg_signed = 0;  // minus number of signed fields
};

// Candidates for one variable in one file. The environment holds the values
// of in-scope symbols.
std::vector<Candidate> EnumerateRewrites(std::int64_t value, const SymbolEnv& in_scope);

// The rewrite variables of a program (FACTORs above the innermost level and
// ADDENDs) and the symbols each may reference.
struct RewriteVar {
  std::string symbol;
  std::size_t nest = 0;
  std::vector<std::string> scope;
};
std::vector<RewriteVar> RewriteVariables(const IrProgram& program);

struct BindOptions {
  std::uint32_t header_size = 32;
};

// Header-binding candidates for LOOP_BOUND or MIN_Y `symbol` of `program`,
// evaluated against `file`. `env` supplies the values used by adjacency.
std::vector<Candidate> EnumerateBindings(const IrProgram& program, const std::string& symbol,
                                         std::span<const std::uint8_t> file,
                                         const SymbolEnv& env, const BindOptions& options);
// LOOP_BOUND and MIN_Y symbols in binding order.
std::vector<std::string> BindingVariables(const IrProgram& program);

// Per file, per variable candidate lists.
using CandidateTable = std::vector<std::vector<std::vector<Candidate>>>;

struct VoteResult {
  std::vector<std::size_t> choice;      // per variable, index into the first supporter's list
  std::vector<std::string> keys;        // chosen key per variable
  std::vector<std::size_t> supporters;  // ascending file indices
  std::uint64_t votes = 0;
  std::uint64_t tuples = 0;  // tuples enumerated; 0 when the cap was hit
};

// Cartesian voting: every file votes once for each tuple in the product of its
// candidate lists. Returns nullopt if some file exceeds `tuple_cap` tuples.
std::optional<VoteResult> VoteCartesian(const CandidateTable& table, std::uint64_t tuple_cap);

enum class AssignVariant { kSimplest, kConceptual, kOptimized };

struct AssignProblem {
  std::size_t files = 0;
  std::size_t variables = 0;
  std::vector<std::string> expressions;
  // weights[v][e][f]; zero means incompatible.
  std::vector<std::vector<std::vector<std::uint32_t>>> weights;
};

struct AssignResult {
  std::vector<std::size_t> compatible;  // ascending
  std::vector<std::pair<std::size_t, std::size_t>> assignments;  // (v, e) in pick order
  std::uint64_t prune_calls = 0;  // optimized variant only
  friend bool operator==(const AssignResult& a, const AssignResult& b) {
    return a.compatible == b.compatible && a.assignments == b.assignments;
  }
};

AssignResult ConsistentAssignment(AssignVariant variant, const AssignProblem& problem);

// Builds the 0/1 weight matrix for a candidate table and resolves it into a
// vote result via `variant`.
VoteResult VoteGreedy(const CandidateTable& table, AssignVariant variant);

enum class VotingMode { kCartesian, kSimplest, kConceptual, kOptimized };

struct GeneralizeOptions {
  std::uint32_t header_size = 32;
  std::uint64_t tuple_cap = 1000000;
  VotingMode voting = VotingMode::kCartesian;
};

struct GroupExample {
  const IrProgram* program = nullptr;
  std::span<const std::uint8_t> file;
  const OutputBuffers* expected = nullptr;
};

struct GeneralizeResult {
  IrProgram program;
  std::vector<std::size_t> supporters;  // examples the program reproduces exactly
  // A bound or input base stayed literal although the examples disagree on
  // its value; a larger header may hold the field.
  bool header_limited = false;
  bool fallback = false;  // greedy assignment used instead of the Cartesian product
};

// Generalizes programs that share one skeleton. Throws std::invalid_argument
// for an empty group or mismatched skeletons.
GeneralizeResult GeneralizeGroup(std::span<const GroupExample> group,
                                 const GeneralizeOptions& options);

// Doubling schedule of header sizes from `start` up to `cap`.
std::vector<std::uint32_t> HeaderSizeSchedule(std::uint32_t start = 32, std::uint32_t cap = 1024);

}  // namespace parsegen

#endif  // PARSEGEN_GENERALIZE_H_
