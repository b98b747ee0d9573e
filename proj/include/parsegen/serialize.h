// On-disk forms: JSON for programs, trees, manifests and reports; raw bytes
// plus an index sidecar for output buffers.

#ifndef PARSEGEN_SERIALIZE_H_
#define PARSEGEN_SERIALIZE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parsegen/formats.h"
#include "parsegen/generalize.h"
#include "parsegen/ir.h"
#include "parsegen/tree.h"

namespace parsegen {

using Json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json ToJson(const ByteExpr& e);  // s-expression string
Json ToJson(const Definition& d);
Json ToJson(const IrProgram& p);
Json ToJson(const ParserTree& t);
Json ToJson(const FormatSpec& s);
Json ToJson(const ParseReport& r);
Json ToJson(const RoundReport& r);

Definition DefinitionFromJson(const Json& j);
IrProgram ProgramFromJson(const Json& j);
ParserTree TreeFromJson(const Json& j);
FormatSpec SpecFromJson(const Json& j);

// Output buffers: arrays concatenated in name order at `path`, and lines
// "<name> <offset> <length>" at `path`.idx.
void WriteOutputs(const std::filesystem::path& path, const OutputBuffers& out);
OutputBuffers ReadOutputs(const std::filesystem::path& path);

struct ManifestEntry {
  std::string name;  // file name relative to the corpus directory
  std::string type;  // type token
  FormatSpec spec;
  std::uint64_t size = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> files;
};

Json ToJson(const Manifest& m);
Manifest ManifestFromJson(const Json& j);

std::string ReadTextFile(const std::filesystem::path& path);
std::vector<std::uint8_t> ReadBinaryFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
void WriteBinaryFile(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace parsegen

#endif  // PARSEGEN_SERIALIZE_H_
