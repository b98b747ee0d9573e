// Loop-structured parser programs.
//
// A program is a list of loop nests. Each nest writes one output array
// region: for every iteration of its (zero-indexed, `<`-bounded) loops it
// emits one record of body statements, each evaluating a shape pattern
// against input offsets that move affinely with the loop indices.

#ifndef PARSEGEN_IR_H_
#define PARSEGEN_IR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parsegen/expr.h"

namespace parsegen {

struct Shape {
  std::string key;
  ByteExpr pattern;
  std::size_t placeholders = 0;
};

// One loop level. Its index runs 0, step, 2*step, ... while < count*step.
// Output advances by idx * out_factor; input by (idx + in_addend) * in_factor.
struct LoopLevel {
  std::int64_t count = 0;
  std::int64_t step = 1;
  std::int64_t out_factor = 0;
  std::int64_t in_factor = 0;
  std::int64_t in_addend = 0;

  std::int64_t bound() const { return count * step; }
  friend bool operator==(const LoopLevel&, const LoopLevel&) = default;
};

struct BodyStmt {
  std::int64_t out_delta = 0;
  std::size_t shape = 0;
  // Input offset of each placeholder relative to the record base (the first
  // placeholder of the first statement).
  std::vector<std::int64_t> in_deltas;
  friend bool operator==(const BodyStmt&, const BodyStmt&) = default;
};

struct LoopNest {
  std::string array;
  std::int64_t min_x = 0;     // output offset of the first record
  std::int64_t min_y = 0;     // smallest input offset read
  std::int64_t y0_delta = 0;  // record base at the loop minimum minus min_y
  std::vector<LoopLevel> levels;  // innermost first
  std::vector<BodyStmt> body;
};

struct FieldRef {
  std::uint32_t offset = 0;
  unsigned bytes = 4;
  bool is_signed = false;
  friend bool operator==(const FieldRef&, const FieldRef&) = default;
};

enum class RewriteKind { kNegPlusOne, kMul, kNegMul, kPad4Mul, kPad4NegMul };

// Replaces the concrete value of one symbol when the program runs.
struct Definition {
  enum class Kind { kField, kProduct, kAdjacency, kRewrite };
  std::string symbol;
  Kind kind = Kind::kField;
  bool negate = false;    // kField, kProduct
  FieldRef a;             // kField, kProduct
  FieldRef b;             // kProduct
  std::int64_t scale = 1; // kField, kProduct: constant multiplier
  std::size_t nest = 0;   // kAdjacency: source nest
  RewriteKind rewrite = RewriteKind::kMul;
  std::string x, y;       // kRewrite operands (y unused for -x+1)

  friend bool operator==(const Definition&, const Definition&) = default;
};

struct IrProgram {
  std::string file_id;
  unsigned stride = 1;
  std::vector<Shape> shapes;
  std::vector<LoopNest> nests;
  std::vector<Definition> defs;
};

std::int64_t Pad4(std::int64_t x);

// Symbol names. Nest k > 0 appends "_N<k>".
std::string LevelLetter(std::size_t level);  // 0 -> "A"
std::string BoundSymbol(std::size_t nest, std::size_t level);
std::string OutFactorSymbol(std::size_t nest, std::size_t level);
std::string InFactorSymbol(std::size_t nest, std::size_t level);
std::string AddendSymbol(std::size_t nest, std::size_t level);
std::string MinXSymbol(std::size_t nest);
std::string MinYSymbol(std::size_t nest);

// Symbol values as recorded in the program, in declaration order.
using SymbolEnv = std::map<std::string, std::int64_t>;
SymbolEnv ConcreteEnv(const IrProgram& program);
// Offset one past the largest input byte a nest reads, given symbol values.
std::int64_t NestEnd(const IrProgram& program, std::size_t nest,
                     const SymbolEnv& env);

std::string RenderDefinition(const Definition& def);

// Canonical text form. Its byte length is the parsimony metric.
std::string ProgramText(const IrProgram& program);

// Structure shared by programs that can be generalized together: stride,
// shapes, per-nest layout, body statements and innermost factors.
std::string SkeletonKey(const IrProgram& program);

}  // namespace parsegen

#endif  // PARSEGEN_IR_H_
