// Loop summarization: turns a flat trace log into nested affine loops.

#ifndef PARSEGEN_LOOPS_H_
#define PARSEGEN_LOOPS_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parsegen/ir.h"
#include "parsegen/trace.h"

namespace parsegen {

class SummarizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IndexPair {
  std::int64_t out = 0;
  std::int64_t in = 0;
};

// A run of points out = out0 + k * out_step, in = in0 + k * in_step for
// k in [0, count).
struct AffineSegment {
  std::int64_t out0 = 0;
  std::int64_t in0 = 0;
  std::int64_t count = 1;
  std::int64_t out_step = 0;
  std::int64_t in_step = 0;
  friend bool operator==(const AffineSegment&, const AffineSegment&) = default;
};

// Greedy exact interpolation: a line through the first two uncovered points
// is extended while the following points stay on it.
std::vector<AffineSegment> Interpolate(std::span<const IndexPair> pairs);

// A partially nested loop: levels are (count, out_step, in_step), innermost
// first, anchored at (out0, in0).
struct RawLevel {
  std::int64_t count = 0;
  std::int64_t out_step = 0;
  std::int64_t in_step = 0;
  friend bool operator==(const RawLevel&, const RawLevel&) = default;
  friend auto operator<=>(const RawLevel&, const RawLevel&) = default;
};

struct NestItem {
  std::size_t group = 0;  // items only merge within one group
  std::int64_t out0 = 0;
  std::int64_t in0 = 0;
  std::vector<RawLevel> levels;
};

struct NestStats {
  std::size_t passes = 0;
};

// Interpolates the anchors of items that share a group and inner levels
// into new outer levels, until a pass merges nothing.
std::vector<NestItem> NestItems(std::vector<NestItem> items, NestStats* stats = nullptr);

// Per-entry abstraction of a log, computed once and reused for every stride.
struct AbstractLog {
  std::string file_id;
  std::vector<Shape> shapes;  // in order of first appearance
  struct Cell {
    std::size_t shape = 0;
    std::vector<std::uint64_t> offsets;
  };
  std::vector<std::pair<std::string, std::vector<Cell>>> arrays;  // by name
};

AbstractLog AbstractTrace(const TraceLog& log);

IrProgram Summarize(const AbstractLog& log, unsigned stride);
IrProgram Summarize(const TraceLog& log, unsigned stride);

struct StrideChoice {
  unsigned stride = 1;
  std::vector<std::size_t> text_bytes;  // per candidate, index 0 = stride 1
};

StrideChoice ChooseStride(const AbstractLog& log, unsigned max_stride = 8);
unsigned ChooseStride(const TraceLog& log, unsigned max_stride = 8);

// Summarize at the stride with the shortest program text.
IrProgram SummarizeBest(const AbstractLog& log, unsigned max_stride = 8);

}  // namespace parsegen

#endif  // PARSEGEN_LOOPS_H_
