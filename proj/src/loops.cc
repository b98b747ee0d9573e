#include "parsegen/loops.h"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace parsegen {

std::vector<AffineSegment> Interpolate(std::span<const IndexPair> pairs) {
  std::vector<AffineSegment> out;
  std::size_t i = 0;
  while (i < pairs.size()) {
    AffineSegment seg;
    seg.out0 = pairs[i].out;
    seg.in0 = pairs[i].in;
    if (i + 1 == pairs.size()) {
      out.push_back(seg);
      break;
    }
    seg.out_step = pairs[i + 1].out - pairs[i].out;
    seg.in_step = pairs[i + 1].in - pairs[i].in;
    seg.count = 2;
    std::size_t j = i + 2;
    while (j < pairs.size() &&
           pairs[j].out == seg.out0 + seg.count * seg.out_step &&
           pairs[j].in == seg.in0 + seg.count * seg.in_step) {
      ++seg.count;
      ++j;
    }
    out.push_back(seg);
    i = j;
  }
  return out;
}

std::vector<NestItem> NestItems(std::vector<NestItem> items, NestStats* stats) {
  std::size_t passes = 0;
  while (true) {
    ++passes;
    std::map<std::pair<std::size_t, std::vector<RawLevel>>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < items.size(); ++i) {
      groups[{items[i].group, items[i].levels}].push_back(i);
    }
    bool merged = false;
    std::vector<NestItem> next;
    next.reserve(items.size());
    for (auto& [key, members] : groups) {
      std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return items[a].out0 < items[b].out0;
      });
      std::vector<IndexPair> pts;
      pts.reserve(members.size());
      for (std::size_t m : members) pts.push_back({items[m].out0, items[m].in0});
      for (const AffineSegment& seg : Interpolate(pts)) {
        NestItem item;
        item.group = key.first;
        item.out0 = seg.out0;
        item.in0 = seg.in0;
        item.levels = key.second;
        if (seg.count > 1) {
          item.levels.push_back({seg.count, seg.out_step, seg.in_step});
          merged = true;
        }
        next.push_back(std::move(item));
      }
    }
    items = std::move(next);
    if (!merged) break;
  }
  std::sort(items.begin(), items.end(), [](const NestItem& a, const NestItem& b) {
    return a.out0 < b.out0;
  });
  if (stats) stats->passes = passes;
  return items;
}

AbstractLog AbstractTrace(const TraceLog& log) {
  AbstractLog out;
  out.file_id = log.file_id;
  std::map<std::string, std::vector<const TraceEntry*>> by_array;
  for (const TraceEntry& e : log.entries) by_array[e.array].push_back(&e);
  std::unordered_map<std::string, std::size_t> shape_index;
  for (auto& [name, entries] : by_array) {
    std::sort(entries.begin(), entries.end(),
              [](const TraceEntry* a, const TraceEntry* b) { return a->index < b->index; });
    std::vector<AbstractLog::Cell> cells;
    cells.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i]->index != i) {
        throw SummarizationError("no trace entry covers " + name + "[" + std::to_string(i) + "]");
      }
      ExprShape shape = AbstractExpr(entries[i]->expr);
      auto [it, inserted] = shape_index.emplace(shape.key, out.shapes.size());
      if (inserted) {
        out.shapes.push_back(
            Shape{shape.key, shape.pattern, PlaceholderCount(shape.pattern)});
      }
      cells.push_back({it->second, std::move(shape.offsets)});
    }
    out.arrays.emplace_back(name, std::move(cells));
  }
  return out;
}

namespace {

struct Record {
  std::int64_t out_start = 0;
  std::int64_t base = 0;
};

std::string SignatureKey(const std::vector<BodyStmt>& body) {
  std::string key;
  for (const BodyStmt& s : body) {
    key += std::to_string(s.out_delta);
    key += ':';
    key += std::to_string(s.shape);
    for (std::int64_t d : s.in_deltas) {
      key += ',';
      key += std::to_string(d);
    }
    key += ';';
  }
  return key;
}

LoopNest MakeNest(const std::string& array, const NestItem& item,
                  const std::vector<BodyStmt>& body) {
  LoopNest n;
  n.array = array;
  n.body = body;
  n.min_x = item.out0;
  std::int64_t base_min = item.in0;
  for (const RawLevel& r : item.levels) {
    LoopLevel lv;
    lv.count = r.count;
    if (r.in_step > 1 && r.out_step > r.in_step && r.out_step % r.in_step == 0) {
      lv.step = r.in_step;
      lv.out_factor = r.out_step / r.in_step;
      lv.in_factor = 1;
    } else {
      lv.out_factor = r.out_step;
      lv.in_factor = r.in_step;
      if (r.in_step < 0) {
        lv.in_addend = -(r.count - 1);
        base_min += (r.count - 1) * r.in_step;
      }
    }
    n.levels.push_back(lv);
  }
  std::int64_t min_delta = 0;
  for (const BodyStmt& s : body) {
    for (std::int64_t d : s.in_deltas) min_delta = std::min(min_delta, d);
  }
  n.y0_delta = -min_delta;
  n.min_y = base_min - n.y0_delta;
  return n;
}

}  // namespace

IrProgram Summarize(const AbstractLog& log, unsigned stride) {
  if (stride == 0) throw SummarizationError("stride must be positive");
  IrProgram prog;
  prog.file_id = log.file_id;
  prog.stride = stride;
  prog.shapes = log.shapes;

  for (const auto& [name, cells] : log.arrays) {
    std::vector<std::vector<BodyStmt>> bodies;
    std::unordered_map<std::string, std::size_t> body_index;
    std::vector<NestItem> items;
    for (std::size_t start = 0; start < cells.size(); start += stride) {
      std::size_t end = std::min(cells.size(), start + stride);
      std::int64_t base = 0;
      bool have_base = false;
      for (std::size_t i = start; i < end && !have_base; ++i) {
        if (!cells[i].offsets.empty()) {
          base = static_cast<std::int64_t>(cells[i].offsets[0]);
          have_base = true;
        }
      }
      std::vector<BodyStmt> body;
      body.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        BodyStmt s;
        s.out_delta = static_cast<std::int64_t>(i - start);
        s.shape = cells[i].shape;
        for (std::uint64_t off : cells[i].offsets) {
          s.in_deltas.push_back(static_cast<std::int64_t>(off) - base);
        }
        body.push_back(std::move(s));
      }
      auto [it, inserted] = body_index.emplace(SignatureKey(body), bodies.size());
      if (inserted) bodies.push_back(std::move(body));
      items.push_back({it->second, static_cast<std::int64_t>(start), base, {}});
    }
    for (const NestItem& item : NestItems(std::move(items))) {
      prog.nests.push_back(MakeNest(name, item, bodies[item.group]));
    }
  }
  return prog;
}

IrProgram Summarize(const TraceLog& log, unsigned stride) {
  return Summarize(AbstractTrace(log), stride);
}

StrideChoice ChooseStride(const AbstractLog& log, unsigned max_stride) {
  StrideChoice choice;
  std::size_t best = SIZE_MAX;
  for (unsigned s = 1; s <= std::max(1u, max_stride); ++s) {
    std::size_t len = ProgramText(Summarize(log, s)).size();
    choice.text_bytes.push_back(len);
    if (len < best) {
      best = len;
      choice.stride = s;
    }
  }
  return choice;
}

unsigned ChooseStride(const TraceLog& log, unsigned max_stride) {
  return ChooseStride(AbstractTrace(log), max_stride).stride;
}

IrProgram SummarizeBest(const AbstractLog& log, unsigned max_stride) {
  return Summarize(log, ChooseStride(log, max_stride).stride);
}

}  // namespace parsegen
