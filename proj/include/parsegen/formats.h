// Reference file formats: corpus generation, the reference parser and its
// traced twin that records one expression per output byte.
//
// Three formats are covered: canonical 44-byte-header PCM WAV, uncompressed
// BMP (V3/V4/V5 headers, 16/24/32 bpp) and FWC, a two-chunk container with a
// fixed 32-byte header.

#ifndef PARSEGEN_FORMATS_H_
#define PARSEGEN_FORMATS_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parsegen/trace.h"

namespace parsegen {

enum class Format { kWav, kBmp, kFwc };
enum class BmpVersion { kV3, kV4, kV5 };

struct FormatSpec {
  Format format = Format::kBmp;

  // WAV
  int channels = 1;
  int bits_per_sample = 8;
  std::uint32_t samples = 16;  // per channel
  std::uint32_t sample_rate = 22050;

  // BMP
  BmpVersion version = BmpVersion::kV3;
  int bpp = 24;
  bool top_down = false;
  bool rgb565 = false;  // 16 bpp only
  bool rgba = false;    // 32 bpp only; needs V4 or V5
  std::int32_t width = 1;
  std::int32_t height = 1;

  // FWC
  std::uint32_t chunk0 = 1;
  std::uint32_t chunk1 = 1;

  friend bool operator==(const FormatSpec&, const FormatSpec&) = default;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OracleError : public std::runtime_error {
 public:
  enum class Kind { kUnknownMagic, kTruncated, kUnsupported };
  OracleError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view OracleErrorKindName(OracleError::Kind kind);

// Type tokens name a file type without its dimensions:
//   wav-m8 wav-m16 wav-s8 wav-s16
//   bmp<16|24|32>[-v4|-v5][-565|-rgba][-td]
//   fwc
std::string TypeToken(const FormatSpec& spec);
FormatSpec ParseTypeToken(std::string_view token);
// Short dimension label, e.g. "61x76", "n300", "5+9".
std::string SizeLabel(const FormatSpec& spec);
std::string FileExtension(Format format);

// Throws GenerationError for specs that violate the format constraints.
void ValidateSpec(const FormatSpec& spec);

// Linear congruential generator used for all payload bytes:
//   state = state * 6364136223846793005 + 1442695040888963407
//   byte  = state >> 56  (taken after the step)
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }
  std::uint8_t NextByte() { return static_cast<std::uint8_t>(Next() >> 56); }
  // Uniform in [lo, hi] by multiply-shift on the high 32 bits.
  std::uint32_t Range(std::uint32_t lo, std::uint32_t hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    return lo + static_cast<std::uint32_t>(((Next() >> 32) * span) >> 32);
  }

 private:
  std::uint64_t state_;
};

std::vector<std::uint8_t> GenerateFile(const FormatSpec& spec, std::uint64_t seed);

struct CorpusFile {
  std::string name;
  FormatSpec spec;
  std::vector<std::uint8_t> bytes;
};

// Generates one file per spec; file i uses payload seed `seed * 1000003 + i`.
std::vector<CorpusFile> GenCorpus(const std::vector<FormatSpec>& specs,
                                  std::uint64_t seed);

struct SizeRange {
  std::uint32_t min_dim = 2;
  std::uint32_t max_dim = 48;
  std::uint32_t min_samples = 16;
  std::uint32_t max_samples = 2048;
  std::uint32_t min_chunk = 1;
  std::uint32_t max_chunk = 4096;
};

// Fills the dimensions (and the WAV sample rate) of a type token with draws
// from `rng`.
FormatSpec RandomSpec(std::string_view token, Lcg& rng, const SizeRange& range);

// Reference parser. Output arrays: WAV "ch0"/"ch1" (int64 LE samples; 8-bit
// samples are widened as value - 128), BMP "pixels" (top-down RGB, or RGBA
// for 32 bpp), FWC "chunk0"/"chunk1".
OutputBuffers OracleParse(std::span<const std::uint8_t> file);

struct TracedOutput {
  OutputBuffers output;
  TraceLog log;
};

// Same parse, additionally recording the expression behind every output byte.
TracedOutput TracedParse(std::span<const std::uint8_t> file,
                         const std::string& file_id);

}  // namespace parsegen

#endif  // PARSEGEN_FORMATS_H_
