// Direct execution of parser programs with bounded input reads and growable
// output arrays.

#ifndef PARSEGEN_INTERP_H_
#define PARSEGEN_INTERP_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parsegen/ir.h"
#include "parsegen/trace.h"

namespace parsegen {

class InterpError : public std::runtime_error {
 public:
  enum class Kind {
    kReadPastEnd,
    kNegativeIndex,
    kUnboundSymbol,
    kOverflow,
    kLimit,
  };
  InterpError(Kind kind, std::int64_t value, const std::string& what)
      : std::runtime_error(what), kind_(kind), value_(value) {}
  Kind kind() const { return kind_; }
  // Offending input offset or output index, when there is one.
  std::int64_t value() const { return value_; }

 private:
  Kind kind_;
  std::int64_t value_;
};

std::string_view InterpErrorKindName(InterpError::Kind kind);

struct InterpLimits {
  std::uint64_t max_output_bytes = 1ULL << 27;
  std::uint64_t max_records = 1ULL << 26;
};

// Reads a little-endian field, throwing kReadPastEnd for missing bytes.
std::int64_t ReadField(std::span<const std::uint8_t> file, const FieldRef& field);

// Concrete symbol values overridden by the program's definitions, evaluated
// in order against `file`.
SymbolEnv ResolveEnv(const IrProgram& program, std::span<const std::uint8_t> file);

// Flattened shape pattern for fast repeated evaluation.
class CompiledShape {
 public:
  explicit CompiledShape(const ByteExpr& pattern);
  // `read(p)` returns the byte for placeholder p.
  template <typename ReadFn>
  std::uint8_t Eval(ReadFn&& read) const;
  bool is_copy() const { return copy_; }

 private:
  struct Instr {
    Op op;
    unsigned width;
    u128 value;
    unsigned hi, lo;
    std::uint64_t placeholder;
    ExprNode node;
  };
  std::vector<Instr> code_;
  bool copy_ = false;
};

OutputBuffers Interpret(const IrProgram& program, std::span<const std::uint8_t> file,
                        const InterpLimits& limits = {});

template <typename ReadFn>
std::uint8_t CompiledShape::Eval(ReadFn&& read) const {
  if (copy_) return read(0);
  BitVec stack[64];
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::kRead:
        stack[sp++] = BitVec{read(in.placeholder), 8};
        break;
      case Op::kConst:
        stack[sp++] = BitVec{in.value, in.width};
        break;
      case Op::kZeroExtend: case Op::kSignExtend: case Op::kExtract:
        stack[sp - 1] = ApplyUnary(in.node, stack[sp - 1]);
        break;
      default:
        stack[sp - 2] = ApplyBinary(in.op, stack[sp - 2], stack[sp - 1]);
        --sp;
        break;
    }
  }
  return stack[0].low8();
}

}  // namespace parsegen

#endif  // PARSEGEN_INTERP_H_
