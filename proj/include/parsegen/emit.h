// C source emission for parser trees, a structural safety scan over the
// emitted text, and differential verification against the interpreter.

#ifndef PARSEGEN_EMIT_H_
#define PARSEGEN_EMIT_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parsegen/expr.h"
#include "parsegen/tree.h"

namespace parsegen {

class EmitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmitOptions {
  // Null leaves become reject branches instead of an EmitError.
  bool partial = false;
};

// A C expression for `expr` whose Read leaves are the parameters p0, p1, ...
// of the enclosing shape function. Widths up to 64 bits use fixed-width
// integer types; 128-bit nodes use the two-limb pg_u128 helpers.
std::string LowerExpr(const ByteExpr& expr);

// Whole translation unit. Usage of the result: `prog <input> <output>`; writes
// the arrays to <output> and their layout to <output>.idx.
std::string EmitSource(const ParserTree& tree, const EmitOptions& options = {});

// Findings of the structural scan: subscripts or direct stream calls outside
// the safety helper section. Empty means the source passes.
std::vector<std::string> ScanEmitted(const std::string& source);

// Emitted program exit codes.
inline constexpr int kEmitExitUsage = 2;
inline constexpr int kEmitExitRead = 3;
inline constexpr int kEmitExitIndex = 4;
inline constexpr int kEmitExitArith = 5;
inline constexpr int kEmitExitReject = 6;

struct EmitVerifyReport {
  bool skipped = false;
  bool compiled = false;
  std::string diagnostics;
  std::size_t files = 0;
  std::size_t identical = 0;
  std::vector<std::string> failures;  // "name: reason"
};

// Compiles `source` with `compiler` (default: $CC, then cc) in `work_dir` and
// compares each file's output with the interpreter's. Interpreter errors
// must map to a nonzero exit.
EmitVerifyReport VerifyEmitted(const std::string& source, const ParserTree& tree,
                               std::span<const CorpusEntry> corpus, const std::string& work_dir,
                               const std::string& compiler = "");

// Name of a working C compiler, or empty if none is found.
std::string FindCompiler();

}  // namespace parsegen

#endif  // PARSEGEN_EMIT_H_
