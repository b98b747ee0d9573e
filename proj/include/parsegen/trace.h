// Trace logs: one record per output byte, mapping (array, index) to an
// expression over the input file.

#ifndef PARSEGEN_TRACE_H_
#define PARSEGEN_TRACE_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parsegen/expr.h"

namespace parsegen {

// Named output arrays, ordered by name.
using OutputBuffers = std::map<std::string, std::vector<std::uint8_t>>;

struct TraceEntry {
  std::string array;
  std::uint64_t index = 0;
  ByteExpr expr;
};

struct TraceLog {
  std::string file_id;
  std::uint64_t input_length = 0;
  std::vector<TraceEntry> entries;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Parses the line format:
//   IN <file-id> <length>
//   OUT <array> <index> := <s-expression>
// Blank lines and lines starting with '#' are ignored.
TraceLog ParseTrace(std::string_view text);
std::string SerializeTrace(const TraceLog& log);

// Checks unique (array, index) pairs, contiguous indices from 0 and reads
// inside the input. Throws SchemaError.
void ValidateTrace(const TraceLog& log);

// Evaluates every entry against `input`; the low byte of each value becomes
// the output byte.
OutputBuffers ReplayTrace(const TraceLog& log,
                          std::span<const std::uint8_t> input);

}  // namespace parsegen

#endif  // PARSEGEN_TRACE_H_
