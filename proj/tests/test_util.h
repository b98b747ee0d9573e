// Shared corpus helpers for the tests.

#ifndef PARSEGEN_TESTS_TEST_UTIL_H_
#define PARSEGEN_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include "parsegen/formats.h"
#include "parsegen/loops.h"
#include "parsegen/tree.h"

namespace parsegen::testing {

inline CorpusEntry EntryFor(const FormatSpec& spec, std::uint64_t seed, const std::string& name = "") {
  CorpusEntry e;
  e.bytes = GenerateFile(spec, seed);
  e.name = name.empty() ? TypeToken(spec) + "_" + SizeLabel(spec) + "_" + std::to_string(seed) : name;
  e.expected = OracleParse(e.bytes);
  return e;
}

inline std::vector<CorpusEntry> FromFiles(const std::vector<CorpusFile>& files) {
  std::vector<CorpusEntry> out;
  for (const CorpusFile& f : files) out.push_back({f.name, f.bytes, OracleParse(f.bytes)});
  return out;
}

// `per_type` random-size files of each token.
inline std::vector<CorpusEntry> MakeCorpus(const std::vector<std::string>& tokens, std::size_t per_type,
                                           std::uint64_t seed, const SizeRange& range = {}) {
  Lcg rng(seed);
  std::vector<FormatSpec> specs;
  for (std::size_t i = 0; i < per_type; ++i) {
    for (const std::string& t : tokens) specs.push_back(RandomSpec(t, rng, range));
  }
  return FromFiles(GenCorpus(specs, seed));
}

inline Tracer TracerFor(const std::vector<CorpusEntry>& corpus) {
  return [&corpus](std::size_t i) { return TracedParse(corpus[i].bytes, corpus[i].name).log; };
}

inline FormatSpec Bmp(const std::string& token, std::int32_t w, std::int32_t h) {
  FormatSpec s = ParseTypeToken(token);
  s.width = w;
  s.height = h;
  return s;
}

inline FormatSpec Wav(const std::string& token, std::uint32_t samples) {
  FormatSpec s = ParseTypeToken(token);
  s.samples = samples;
  return s;
}

inline FormatSpec Fwc(std::uint32_t a, std::uint32_t b) {
  FormatSpec s = ParseTypeToken("fwc");
  s.chunk0 = a;
  s.chunk1 = b;
  return s;
}

inline const std::vector<std::string>& MixedTokens() {
  static const std::vector<std::string> t = {"wav-m8", "wav-m16", "wav-s8",   "wav-s16",
                                             "bmp16",  "bmp24",   "bmp24-td", "bmp32",
                                             "bmp32-td", "fwc"};
  return t;
}

}  // namespace parsegen::testing

#endif  // PARSEGEN_TESTS_TEST_UTIL_H_
