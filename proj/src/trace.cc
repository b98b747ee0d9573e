#include "parsegen/trace.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <utility>

namespace parsegen {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view NextToken(std::string_view& s) {
  s = Trim(s);
  std::size_t end = 0;
  while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
  std::string_view tok = s.substr(0, end);
  s.remove_prefix(end);
  return tok;
}

bool ParseU64(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Walks an expression and reports the largest offset read.
bool MaxRead(const ByteExpr& e, std::uint64_t& max) {
  const ExprNode& n = *e.node();
  switch (n.op) {
    case Op::kRead:
      max = std::max(max, n.offset);
      return true;
    case Op::kConst:
      return false;
    case Op::kZeroExtend: case Op::kSignExtend: case Op::kExtract:
      return MaxRead(n.a, max);
    default: {
      bool l = MaxRead(n.a, max);
      bool r = MaxRead(n.b, max);
      return l || r;
    }
  }
}

}  // namespace

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what),
      line_(line) {}

TraceLog ParseTrace(std::string_view text) {
  TraceLog log;
  bool have_header = false;
  std::set<std::pair<std::string, std::uint64_t>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::string_view rest = line;
    std::string_view kw = NextToken(rest);
    if (kw == "IN") {
      if (have_header) throw TraceParseError(line_no, "duplicate IN header");
      std::string_view id = NextToken(rest);
      std::string_view len = NextToken(rest);
      if (id.empty() || !ParseU64(len, log.input_length) || !Trim(rest).empty()) {
        throw TraceParseError(line_no, "malformed IN header");
      }
      log.file_id = std::string(id);
      have_header = true;
    } else if (kw == "OUT") {
      if (!have_header) throw TraceParseError(line_no, "OUT before IN header");
      TraceEntry entry;
      entry.array = std::string(NextToken(rest));
      std::uint64_t index = 0;
      if (entry.array.empty() || !ParseU64(NextToken(rest), index) ||
          NextToken(rest) != ":=") {
        throw TraceParseError(line_no, "malformed OUT record");
      }
      entry.index = index;
      try {
        entry.expr = ParseSexpr(Trim(rest));
      } catch (const SchemaError& e) {
        throw TraceParseError(line_no, e.what());
      }
      if (!seen.emplace(entry.array, entry.index).second) {
        throw TraceParseError(line_no, "duplicate output " + entry.array + "[" +
                                           std::to_string(entry.index) + "]");
      }
      log.entries.push_back(std::move(entry));
    } else {
      throw TraceParseError(line_no, "unknown record '" + std::string(kw) + "'");
    }
  }
  if (!have_header) throw TraceParseError(line_no, "missing IN header");
  return log;
}

std::string SerializeTrace(const TraceLog& log) {
  std::string out = "IN " + log.file_id + " " + std::to_string(log.input_length) + "\n";
  for (const TraceEntry& e : log.entries) {
    out += "OUT ";
    out += e.array;
    out += ' ';
    out += std::to_string(e.index);
    out += " := ";
    out += ToSexpr(e.expr);
    out += '\n';
  }
  return out;
}

void ValidateTrace(const TraceLog& log) {
  std::map<std::string, std::set<std::uint64_t>> indices;
  for (const TraceEntry& e : log.entries) {
    if (!indices[e.array].insert(e.index).second) {
      throw SchemaError("duplicate output " + e.array + "[" + std::to_string(e.index) + "]");
    }
    std::uint64_t max = 0;
    if (MaxRead(e.expr, max) && max >= log.input_length) {
      throw SchemaError("output " + e.array + "[" + std::to_string(e.index) +
                        "] reads offset " + std::to_string(max) +
                        " past the input length " + std::to_string(log.input_length));
    }
  }
  for (const auto& [array, set] : indices) {
    if (*set.rbegin() + 1 != set.size()) {
      throw SchemaError("output array " + array + " is not contiguous from 0");
    }
  }
}

OutputBuffers ReplayTrace(const TraceLog& log, std::span<const std::uint8_t> input) {
  OutputBuffers out;
  for (const TraceEntry& e : log.entries) {
    std::vector<std::uint8_t>& buf = out[e.array];
    if (buf.size() <= e.index) buf.resize(e.index + 1, 0);
    buf[e.index] = Eval(e.expr, input).low8();
  }
  return out;
}

}  // namespace parsegen
