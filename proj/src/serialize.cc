#include "parsegen/serialize.h"

#include <fstream>
#include <sstream>

namespace parsegen {

namespace {

const char* KindName(Definition::Kind k) {
  switch (k) {
    case Definition::Kind::kField: return "field";
    case Definition::Kind::kProduct: return "product";
    case Definition::Kind::kAdjacency: return "adjacency";
    case Definition::Kind::kRewrite: return "rewrite";
  }
  return "?";
}

Definition::Kind KindFromName(const std::string& s) {
  if (s == "field") return Definition::Kind::kField;
  if (s == "product") return Definition::Kind::kProduct;
  if (s == "adjacency") return Definition::Kind::kAdjacency;
  if (s == "rewrite") return Definition::Kind::kRewrite;
  throw FormatError("unknown definition kind " + s);
}

const char* RewriteName(RewriteKind k) {
  switch (k) {
    case RewriteKind::kNegPlusOne: return "neg_plus_one";
    case RewriteKind::kMul: return "mul";
    case RewriteKind::kNegMul: return "neg_mul";
    case RewriteKind::kPad4Mul: return "pad4_mul";
    case RewriteKind::kPad4NegMul: return "pad4_neg_mul";
  }
  return "?";
}

RewriteKind RewriteFromName(const std::string& s) {
  for (RewriteKind k : {RewriteKind::kNegPlusOne, RewriteKind::kMul, RewriteKind::kNegMul,
                        RewriteKind::kPad4Mul, RewriteKind::kPad4NegMul}) {
    if (s == RewriteName(k)) return k;
  }
  throw FormatError("unknown rewrite " + s);
}

Json FieldJson(const FieldRef& f) {
  return {{"offset", f.offset}, {"bytes", f.bytes}, {"signed", f.is_signed}};
}

FieldRef FieldFromJson(const Json& j) {
  FieldRef f;
  f.offset = j.at("offset").get<std::uint32_t>();
  f.bytes = j.at("bytes").get<unsigned>();
  f.is_signed = j.at("signed").get<bool>();
  if (f.bytes != 1 && f.bytes != 2 && f.bytes != 4 && f.bytes != 8) {
    throw FormatError("field width must be 1, 2, 4 or 8 bytes");
  }
  return f;
}

}  // namespace

Json ToJson(const ByteExpr& e) { return ToSexpr(e); }

Json ToJson(const Definition& d) {
  Json j = {{"symbol", d.symbol}, {"kind", KindName(d.kind)}};
  switch (d.kind) {
    case Definition::Kind::kField:
      j["negate"] = d.negate;
      j["scale"] = d.scale;
      j["a"] = FieldJson(d.a);
      break;
    case Definition::Kind::kProduct:
      j["negate"] = d.negate;
      j["scale"] = d.scale;
      j["a"] = FieldJson(d.a);
      j["b"] = FieldJson(d.b);
      break;
    case Definition::Kind::kAdjacency:
      j["nest"] = d.nest;
      break;
    case Definition::Kind::kRewrite:
      j["rewrite"] = RewriteName(d.rewrite);
      j["x"] = d.x;
      if (d.rewrite != RewriteKind::kNegPlusOne) j["y"] = d.y;
      break;
  }
  j["text"] = RenderDefinition(d);
  return j;
}

Definition DefinitionFromJson(const Json& j) try {
  Definition d;
  d.symbol = j.at("symbol").get<std::string>();
  d.kind = KindFromName(j.at("kind").get<std::string>());
  switch (d.kind) {
    case Definition::Kind::kProduct:
      d.b = FieldFromJson(j.at("b"));
      [[fallthrough]];
    case Definition::Kind::kField:
      d.negate = j.value("negate", false);
      d.scale = j.value("scale", std::int64_t{1});
      d.a = FieldFromJson(j.at("a"));
      break;
    case Definition::Kind::kAdjacency:
      d.nest = j.at("nest").get<std::size_t>();
      break;
    case Definition::Kind::kRewrite:
      d.rewrite = RewriteFromName(j.at("rewrite").get<std::string>());
      d.x = j.at("x").get<std::string>();
      d.y = j.value("y", std::string());
      break;
  }
  return d;
} catch (const Json::exception& e) {
  throw FormatError(std::string("malformed definition: ") + e.what());
}

Json ToJson(const IrProgram& p) {
  Json shapes = Json::array();
  for (const Shape& s : p.shapes) shapes.push_back({{"key", s.key}, {"pattern", ToSexpr(s.pattern)}});
  Json nests = Json::array();
  for (const LoopNest& n : p.nests) {
    Json levels = Json::array();
    for (const LoopLevel& l : n.levels) {
      levels.push_back({{"count", l.count},
                        {"step", l.step},
                        {"out_factor", l.out_factor},
                        {"in_factor", l.in_factor},
                        {"in_addend", l.in_addend}});
    }
    Json body = Json::array();
    for (const BodyStmt& s : n.body) {
      body.push_back({{"out_delta", s.out_delta}, {"shape", s.shape}, {"in_deltas", s.in_deltas}});
    }
    nests.push_back({{"array", n.array},
                     {"min_x", n.min_x},
                     {"min_y", n.min_y},
                     {"y0_delta", n.y0_delta},
                     {"levels", levels},
                     {"body", body}});
  }
  Json defs = Json::array();
  for (const Definition& d : p.defs) defs.push_back(ToJson(d));
  return {{"file_id", p.file_id}, {"stride", p.stride}, {"shapes", shapes},
          {"nests", nests},       {"defs", defs}};
}

IrProgram ProgramFromJson(const Json& j) {
  IrProgram p;
  try {
    p.file_id = j.at("file_id").get<std::string>();
    p.stride = j.at("stride").get<unsigned>();
    for (const Json& s : j.at("shapes")) {
      Shape shape;
      shape.key = s.at("key").get<std::string>();
      shape.pattern = ParseSexpr(s.at("pattern").get<std::string>());
      shape.placeholders = PlaceholderCount(shape.pattern);
      p.shapes.push_back(std::move(shape));
    }
    for (const Json& jn : j.at("nests")) {
      LoopNest n;
      n.array = jn.at("array").get<std::string>();
      n.min_x = jn.at("min_x").get<std::int64_t>();
      n.min_y = jn.at("min_y").get<std::int64_t>();
      n.y0_delta = jn.at("y0_delta").get<std::int64_t>();
      for (const Json& jl : jn.at("levels")) {
        LoopLevel l;
        l.count = jl.at("count").get<std::int64_t>();
        l.step = jl.at("step").get<std::int64_t>();
        l.out_factor = jl.at("out_factor").get<std::int64_t>();
        l.in_factor = jl.at("in_factor").get<std::int64_t>();
        l.in_addend = jl.at("in_addend").get<std::int64_t>();
        if (l.step <= 0) throw FormatError("loop step must be positive");
        n.levels.push_back(l);
      }
      for (const Json& js : jn.at("body")) {
        BodyStmt s;
        s.out_delta = js.at("out_delta").get<std::int64_t>();
        s.shape = js.at("shape").get<std::size_t>();
        s.in_deltas = js.at("in_deltas").get<std::vector<std::int64_t>>();
        if (s.shape >= p.shapes.size()) throw FormatError("body statement names a missing shape");
        if (s.in_deltas.size() != p.shapes[s.shape].placeholders) {
          throw FormatError("body statement has the wrong number of input offsets");
        }
        n.body.push_back(std::move(s));
      }
      p.nests.push_back(std::move(n));
    }
    for (const Json& jd : j.at("defs")) p.defs.push_back(DefinitionFromJson(jd));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed program: ") + e.what());
  }
  return p;
}

Json ToJson(const ParserTree& t) {
  if (t.is_leaf()) return {{"leaf", t.parser ? ToJson(*t.parser) : Json(nullptr)}};
  return {{"index", t.predicate->index},
          {"value", t.predicate->value},
          {"sat", ToJson(*t.sat)},
          {"unsat", ToJson(*t.unsat)}};
}

ParserTree TreeFromJson(const Json& j) {
  try {
    if (j.contains("leaf")) {
      const Json& l = j.at("leaf");
      if (l.is_null()) return ParserTree::Leaf(nullptr);
      return ParserTree::Leaf(std::make_shared<const IrProgram>(ProgramFromJson(l)));
    }
    Predicate p{j.at("index").get<std::uint32_t>(), j.at("value").get<std::uint8_t>()};
    return ParserTree::Node(p, TreeFromJson(j.at("sat")), TreeFromJson(j.at("unsat")));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed tree: ") + e.what());
  }
}

Json ToJson(const FormatSpec& s) {
  return {{"type", TypeToken(s)},     {"channels", s.channels}, {"bits_per_sample", s.bits_per_sample},
          {"samples", s.samples},     {"sample_rate", s.sample_rate},
          {"width", s.width},         {"height", s.height},
          {"chunk0", s.chunk0},       {"chunk1", s.chunk1}};
}

FormatSpec SpecFromJson(const Json& j) {
  FormatSpec s = ParseTypeToken(j.at("type").get<std::string>());
  s.samples = j.value("samples", s.samples);
  s.sample_rate = j.value("sample_rate", s.sample_rate);
  s.width = j.value("width", s.width);
  s.height = j.value("height", s.height);
  s.chunk0 = j.value("chunk0", s.chunk0);
  s.chunk1 = j.value("chunk1", s.chunk1);
  return s;
}

Json ToJson(const ParseReport& r) {
  Json verdicts = Json::array();
  for (const Verdict& v : r.verdicts) {
    Json jv = {{"kind", VerdictKindName(v.kind)}, {"leaf", v.leaf}};
    if (v.kind == Verdict::Kind::kMismatch) {
      jv["array"] = v.array;
      jv["offset"] = v.offset;
    }
    if (v.kind == Verdict::Kind::kError) jv["error"] = v.error;
    verdicts.push_back(jv);
  }
  return {{"parseable", r.parseable}, {"unparseable", r.unparseable}, {"verdicts", verdicts}};
}

Json ToJson(const RoundReport& r) {
  return {{"round", r.round},
          {"logs_acquired", r.logs_acquired},
          {"unparseable", r.unparseable},
          {"traced_bytes", r.traced_bytes},
          {"header_size", r.header_size}};
}

Json ToJson(const Manifest& m) {
  Json files = Json::array();
  for (const ManifestEntry& e : m.files) {
    files.push_back({{"name", e.name}, {"type", e.type}, {"size", e.size}, {"spec", ToJson(e.spec)}});
  }
  return {{"seed", m.seed}, {"files", files}};
}

Manifest ManifestFromJson(const Json& j) {
  Manifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const Json& f : j.at("files")) {
      ManifestEntry e;
      e.name = f.at("name").get<std::string>();
      e.type = f.at("type").get<std::string>();
      e.size = f.at("size").get<std::uint64_t>();
      e.spec = SpecFromJson(f.at("spec"));
      m.files.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void WriteOutputs(const std::filesystem::path& path, const OutputBuffers& out) {
  std::vector<std::uint8_t> raw;
  std::string idx;
  for (const auto& [name, bytes] : out) {
    idx += name + " " + std::to_string(raw.size()) + " " + std::to_string(bytes.size()) + "\n";
    raw.insert(raw.end(), bytes.begin(), bytes.end());
  }
  WriteBinaryFile(path, raw);
  WriteTextFile(path.string() + ".idx", idx);
}

OutputBuffers ReadOutputs(const std::filesystem::path& path) {
  std::vector<std::uint8_t> raw = ReadBinaryFile(path);
  std::istringstream idx(ReadTextFile(path.string() + ".idx"));
  OutputBuffers out;
  std::string name;
  std::uint64_t offset = 0, length = 0;
  while (idx >> name >> offset >> length) {
    if (offset > raw.size() || length > raw.size() - offset) {
      throw FormatError("output index points past the data in " + path.string());
    }
    out[name].assign(raw.begin() + static_cast<std::ptrdiff_t>(offset),
                     raw.begin() + static_cast<std::ptrdiff_t>(offset + length));
  }
  if (!idx.eof()) throw FormatError("malformed output index for " + path.string());
  return out;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> ReadBinaryFile(const std::filesystem::path& path) {
  std::string s = ReadTextFile(path);
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void WriteBinaryFile(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  WriteTextFile(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace parsegen
