#include "parsegen/formats.h"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace parsegen {

namespace {

constexpr std::uint32_t kWavHeaderSize = 44;
constexpr std::uint32_t kSampleRates[] = {8000, 11025, 16000, 22050, 32000, 44100, 48000};
constexpr std::uint32_t kFwcHeaderSize = 32;

void PutU16(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  b[at] = static_cast<std::uint8_t>(v);
  b[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

void PutU32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void PutTag(std::vector<std::uint8_t>& b, std::size_t at, const char* tag) {
  std::memcpy(b.data() + at, tag, 4);
}

std::uint32_t GetU16(std::span<const std::uint8_t> b, std::size_t at) {
  return b[at] | (static_cast<std::uint32_t>(b[at + 1]) << 8);
}

std::uint32_t GetU32(std::span<const std::uint8_t> b, std::size_t at) {
  return b[at] | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool HasTag(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return b.size() >= at + 4 && std::memcmp(b.data() + at, tag, 4) == 0;
}

std::uint64_t Pad4(std::uint64_t n) { return (n + 3) / 4 * 4; }

[[noreturn]] void Truncated(const std::string& what) {
  throw OracleError(OracleError::Kind::kTruncated, what);
}

[[noreturn]] void Unsupported(const std::string& what) {
  throw OracleError(OracleError::Kind::kUnsupported, what);
}

// ---- header decoding, shared by both parse paths ----

struct WavLayout {
  std::uint32_t channels = 0;
  std::uint32_t bits = 0;
  std::uint64_t samples = 0;  // per channel
};

struct FwcLayout {
  std::uint64_t len0 = 0;
  std::uint64_t len1 = 0;
};

enum class PixelKind { k555, k565, kBgr, kBgra, kRgba };

struct BmpLayout {
  std::uint64_t pixel_offset = 0;
  std::uint64_t width = 0;
  std::uint64_t height = 0;
  bool top_down = false;
  PixelKind kind = PixelKind::kBgr;
  std::uint64_t row_stride = 0;

  unsigned in_bytes() const {
    switch (kind) {
      case PixelKind::k555: case PixelKind::k565: return 2;
      case PixelKind::kBgr: return 3;
      default: return 4;
    }
  }
  unsigned out_bytes() const {
    return kind == PixelKind::kBgra || kind == PixelKind::kRgba ? 4 : 3;
  }
  std::uint64_t RowOffset(std::uint64_t out_row) const {
    std::uint64_t file_row = top_down ? out_row : height - 1 - out_row;
    return pixel_offset + file_row * row_stride;
  }
};

WavLayout DecodeWav(std::span<const std::uint8_t> f) {
  if (f.size() < kWavHeaderSize) Truncated("WAV header shorter than 44 bytes");
  if (!HasTag(f, 8, "WAVE") || !HasTag(f, 12, "fmt ") || !HasTag(f, 36, "data")) {
    Unsupported("WAV without canonical fmt/data layout");
  }
  WavLayout w;
  if (GetU16(f, 20) != 1) Unsupported("WAV format tag is not PCM");
  w.channels = GetU16(f, 22);
  w.bits = GetU16(f, 34);
  if (w.channels != 1 && w.channels != 2) Unsupported("WAV channel count");
  if (w.bits != 8 && w.bits != 16) Unsupported("WAV bits per sample");
  std::uint32_t align = GetU16(f, 32);
  if (align != w.channels * w.bits / 8) Unsupported("WAV block alignment");
  std::uint64_t data_size = GetU32(f, 40);
  if (data_size % align != 0) Unsupported("WAV data size not a multiple of the block");
  if (f.size() < kWavHeaderSize + data_size) Truncated("WAV data chunk truncated");
  w.samples = data_size / align;
  return w;
}

FwcLayout DecodeFwc(std::span<const std::uint8_t> f) {
  if (f.size() < kFwcHeaderSize) Truncated("FWC header shorter than 32 bytes");
  FwcLayout c;
  c.len0 = GetU32(f, 4);
  c.len1 = GetU32(f, 8);
  if (f.size() < kFwcHeaderSize + c.len0 + c.len1) Truncated("FWC chunk truncated");
  return c;
}

BmpLayout DecodeBmp(std::span<const std::uint8_t> f) {
  if (f.size() < 54) Truncated("BMP header shorter than 54 bytes");
  BmpLayout b;
  std::uint32_t header_size = GetU32(f, 14);
  if (header_size != 40 && header_size != 108 && header_size != 124) {
    Unsupported("BMP header size " + std::to_string(header_size));
  }
  if (f.size() < 14 + header_size) Truncated("BMP info header truncated");
  b.pixel_offset = GetU32(f, 10);
  auto width = static_cast<std::int32_t>(GetU32(f, 18));
  auto height = static_cast<std::int32_t>(GetU32(f, 22));
  if (width <= 0 || height == 0 || height == INT32_MIN) Unsupported("BMP dimensions");
  b.width = static_cast<std::uint64_t>(width);
  b.top_down = height < 0;
  b.height = static_cast<std::uint64_t>(height < 0 ? -static_cast<std::int64_t>(height) : height);
  std::uint32_t bpp = GetU16(f, 28);
  std::uint32_t compression = GetU32(f, 30);
  std::uint64_t mask_end = 14 + header_size;
  if (compression == 0) {
    switch (bpp) {
      case 16: b.kind = PixelKind::k555; break;
      case 24: b.kind = PixelKind::kBgr; break;
      case 32: b.kind = PixelKind::kBgra; break;
      default: Unsupported("BMP bpp " + std::to_string(bpp));
    }
  } else if (compression == 3) {
    if (header_size == 40) {
      if (f.size() < 66) Truncated("BMP bitfield masks truncated");
      mask_end = 66;
    }
    std::uint32_t r = GetU32(f, 54), g = GetU32(f, 58), bl = GetU32(f, 62);
    if (bpp == 16 && r == 0xF800 && g == 0x07E0 && bl == 0x001F) {
      b.kind = PixelKind::k565;
    } else if (bpp == 16 && r == 0x7C00 && g == 0x03E0 && bl == 0x001F) {
      b.kind = PixelKind::k555;
    } else if (bpp == 32 && header_size != 40 && r == 0x000000FF &&
               g == 0x0000FF00 && bl == 0x00FF0000) {
      b.kind = PixelKind::kRgba;
    } else if (bpp == 32 && header_size != 40 && r == 0x00FF0000 &&
               g == 0x0000FF00 && bl == 0x000000FF) {
      b.kind = PixelKind::kBgra;
    } else {
      Unsupported("BMP bitfield masks");
    }
  } else {
    Unsupported("BMP compression " + std::to_string(compression));
  }
  if (b.pixel_offset < mask_end) Unsupported("BMP pixel data overlaps the header");
  b.row_stride = Pad4(b.width * b.in_bytes());
  if (b.height > (1ULL << 31) / std::max<std::uint64_t>(b.row_stride, 1)) {
    Unsupported("BMP too large");
  }
  if (f.size() < b.pixel_offset + b.row_stride * b.height) Truncated("BMP pixel data truncated");
  return b;
}

Format Sniff(std::span<const std::uint8_t> f) {
  if (HasTag(f, 0, "RIFF")) return Format::kWav;
  if (HasTag(f, 0, "FWC0")) return Format::kFwc;
  if (f.size() >= 2 && f[0] == 'B' && f[1] == 'M') return Format::kBmp;
  throw OracleError(OracleError::Kind::kUnknownMagic, "unknown file magic");
}

void PutI64(std::vector<std::uint8_t>& out, std::int64_t v) {
  auto u = static_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

std::uint8_t Expand5(std::uint32_t v) { return static_cast<std::uint8_t>((v * 33) >> 2); }
std::uint8_t Expand6(std::uint32_t v) { return static_cast<std::uint8_t>((v * 65) >> 4); }

// ---- expression builders for the traced path ----

ByteExpr C(u128 v, unsigned w) { return ByteExpr::Const(v, w); }

ByteExpr Word16At32(std::uint64_t at) {
  ByteExpr lo = ByteExpr::ZeroExtend(32, ByteExpr::Read(at));
  ByteExpr hi = ByteExpr::ZeroExtend(32, ByteExpr::Read(at + 1));
  return ByteExpr::Binary(Op::kOr, lo, ByteExpr::Shl(hi, C(8, 32)));
}

// (((word & mask) >> shift) * mul) >> post, low 8 bits.
ByteExpr Channel(std::uint64_t at, std::uint32_t mask, unsigned shift,
                 unsigned mul, unsigned post) {
  ByteExpr v = ByteExpr::Binary(Op::kAnd, Word16At32(at), C(mask, 32));
  if (shift > 0) v = ByteExpr::AShr(v, C(shift, 32));
  v = ByteExpr::Binary(Op::kMul, C(mul, 32), v);
  v = ByteExpr::AShr(v, C(post, 32));
  return ByteExpr::Extract(7, 0, v);
}

ByteExpr SampleByte(const WavLayout& w, std::uint64_t at, unsigned byte) {
  ByteExpr wide;
  if (w.bits == 8) {
    wide = ByteExpr::Binary(Op::kSub, ByteExpr::ZeroExtend(64, ByteExpr::Read(at)),
                            C(128, 64));
  } else {
    ByteExpr lo = ByteExpr::ZeroExtend(16, ByteExpr::Read(at));
    ByteExpr hi = ByteExpr::Shl(ByteExpr::ZeroExtend(16, ByteExpr::Read(at + 1)), C(8, 16));
    wide = ByteExpr::SignExtend(64, ByteExpr::Binary(Op::kOr, lo, hi));
  }
  return ByteExpr::Extract(8 * byte + 7, 8 * byte, wide);
}

}  // namespace

std::string_view OracleErrorKindName(OracleError::Kind kind) {
  switch (kind) {
    case OracleError::Kind::kUnknownMagic: return "unknown-magic";
    case OracleError::Kind::kTruncated: return "truncated";
    case OracleError::Kind::kUnsupported: return "unsupported";
  }
  return "?";
}

std::string TypeToken(const FormatSpec& s) {
  switch (s.format) {
    case Format::kWav:
      return std::string("wav-") + (s.channels == 2 ? "s" : "m") +
             std::to_string(s.bits_per_sample);
    case Format::kFwc:
      return "fwc";
    case Format::kBmp: {
      std::string t = "bmp" + std::to_string(s.bpp);
      if (s.version == BmpVersion::kV4) t += "-v4";
      if (s.version == BmpVersion::kV5) t += "-v5";
      if (s.rgb565) t += "-565";
      if (s.rgba) t += "-rgba";
      if (s.top_down) t += "-td";
      return t;
    }
  }
  return "?";
}

FormatSpec ParseTypeToken(std::string_view token) {
  FormatSpec s;
  auto fail = [&]() -> FormatSpec {
    throw GenerationError("unknown type token '" + std::string(token) + "'");
  };
  if (token == "fwc") {
    s.format = Format::kFwc;
    return s;
  }
  if (token.substr(0, 4) == "wav-" && token.size() >= 6) {
    s.format = Format::kWav;
    char c = token[4];
    std::string_view bits = token.substr(5);
    if ((c != 'm' && c != 's') || (bits != "8" && bits != "16")) return fail();
    s.channels = c == 's' ? 2 : 1;
    s.bits_per_sample = bits == "8" ? 8 : 16;
    return s;
  }
  if (token.substr(0, 3) != "bmp") return fail();
  s.format = Format::kBmp;
  std::string_view rest = token.substr(3);
  std::size_t dash = rest.find('-');
  std::string_view bpp = rest.substr(0, dash);
  if (bpp == "16") s.bpp = 16;
  else if (bpp == "24") s.bpp = 24;
  else if (bpp == "32") s.bpp = 32;
  else return fail();
  while (dash != std::string_view::npos) {
    rest.remove_prefix(dash + 1);
    dash = rest.find('-');
    std::string_view part = rest.substr(0, dash);
    if (part == "v4") s.version = BmpVersion::kV4;
    else if (part == "v5") s.version = BmpVersion::kV5;
    else if (part == "565") s.rgb565 = true;
    else if (part == "rgba") s.rgba = true;
    else if (part == "td") s.top_down = true;
    else return fail();
  }
  return s;
}

std::string SizeLabel(const FormatSpec& s) {
  switch (s.format) {
    case Format::kWav: return "n" + std::to_string(s.samples);
    case Format::kFwc: return std::to_string(s.chunk0) + "+" + std::to_string(s.chunk1);
    case Format::kBmp: return std::to_string(s.width) + "x" + std::to_string(s.height);
  }
  return "?";
}

std::string FileExtension(Format format) {
  switch (format) {
    case Format::kWav: return ".wav";
    case Format::kBmp: return ".bmp";
    case Format::kFwc: return ".fwc";
  }
  return ".bin";
}

void ValidateSpec(const FormatSpec& s) {
  auto fail = [](const std::string& why) { throw GenerationError(why); };
  switch (s.format) {
    case Format::kWav:
      if (s.channels != 1 && s.channels != 2) fail("WAV channels must be 1 or 2");
      if (s.bits_per_sample != 8 && s.bits_per_sample != 16) fail("WAV bits must be 8 or 16");
      if (s.samples < 1) fail("WAV needs at least one sample");
      if (s.sample_rate < 1 || s.sample_rate > 1000000) fail("WAV sample rate out of range");
      if (static_cast<std::uint64_t>(s.samples) * s.channels * s.bits_per_sample / 8 >
          0x7FFFFFFFULL) {
        fail("WAV data too large");
      }
      break;
    case Format::kFwc:
      if (s.chunk0 < 1 || s.chunk1 < 1) fail("FWC chunk lengths must be at least 1");
      break;
    case Format::kBmp:
      if (s.bpp != 16 && s.bpp != 24 && s.bpp != 32) fail("BMP bpp must be 16, 24 or 32");
      if (s.width < 1 || s.height < 1) fail("BMP width and height must be at least 1");
      if (s.width > 65535 || s.height > 65535) fail("BMP dimensions too large");
      if (s.rgb565 && s.bpp != 16) fail("5-6-5 layout needs 16 bpp");
      if (s.rgba && s.bpp != 32) fail("RGBA order needs 32 bpp");
      if (s.rgba && s.version == BmpVersion::kV3) fail("RGBA order needs a V4 or V5 header");
      break;
  }
}

std::vector<std::uint8_t> GenerateFile(const FormatSpec& s, std::uint64_t seed) {
  ValidateSpec(s);
  Lcg rng(seed);
  std::vector<std::uint8_t> b;
  switch (s.format) {
    case Format::kWav: {
      std::uint32_t align = static_cast<std::uint32_t>(s.channels * s.bits_per_sample / 8);
      std::uint32_t data = s.samples * align;
      b.assign(kWavHeaderSize + data, 0);
      PutTag(b, 0, "RIFF");
      PutU32(b, 4, 36 + data);
      PutTag(b, 8, "WAVE");
      PutTag(b, 12, "fmt ");
      PutU32(b, 16, 16);
      PutU16(b, 20, 1);
      PutU16(b, 22, static_cast<std::uint32_t>(s.channels));
      PutU32(b, 24, s.sample_rate);
      PutU32(b, 28, s.sample_rate * align);
      PutU16(b, 32, align);
      PutU16(b, 34, static_cast<std::uint32_t>(s.bits_per_sample));
      PutTag(b, 36, "data");
      PutU32(b, 40, data);
      for (std::size_t i = kWavHeaderSize; i < b.size(); ++i) b[i] = rng.NextByte();
      break;
    }
    case Format::kFwc: {
      b.assign(kFwcHeaderSize + std::uint64_t{s.chunk0} + s.chunk1, 0);
      PutTag(b, 0, "FWC0");
      PutU32(b, 4, s.chunk0);
      PutU32(b, 8, s.chunk1);
      for (std::size_t i = kFwcHeaderSize; i < b.size(); ++i) b[i] = rng.NextByte();
      break;
    }
    case Format::kBmp: {
      std::uint32_t header_size = s.version == BmpVersion::kV3 ? 40
                                  : s.version == BmpVersion::kV4 ? 108 : 124;
      bool bitfields = s.rgb565 || s.rgba;
      std::uint32_t pixel_offset = 14 + header_size;
      if (s.version == BmpVersion::kV3 && bitfields) pixel_offset += 12;
      std::uint64_t stride = Pad4(static_cast<std::uint64_t>(s.width) * (s.bpp / 8));
      std::uint64_t image = stride * static_cast<std::uint64_t>(s.height);
      b.assign(pixel_offset + image, 0);
      b[0] = 'B';
      b[1] = 'M';
      PutU32(b, 2, static_cast<std::uint32_t>(b.size()));
      PutU32(b, 10, pixel_offset);
      PutU32(b, 14, header_size);
      PutU32(b, 18, static_cast<std::uint32_t>(s.width));
      PutU32(b, 22, static_cast<std::uint32_t>(s.top_down ? -s.height : s.height));
      PutU16(b, 26, 1);
      PutU16(b, 28, static_cast<std::uint32_t>(s.bpp));
      PutU32(b, 30, bitfields ? 3 : 0);
      PutU32(b, 34, static_cast<std::uint32_t>(image));
      PutU32(b, 38, 2835);
      PutU32(b, 42, 2835);
      std::uint32_t mr = 0, mg = 0, mb = 0, ma = 0;
      if (s.bpp == 16) {
        if (s.rgb565) {
          mr = 0xF800; mg = 0x07E0; mb = 0x001F;
        } else {
          mr = 0x7C00; mg = 0x03E0; mb = 0x001F;
        }
      } else if (s.bpp == 32) {
        ma = 0xFF000000;
        if (s.rgba) {
          mr = 0x000000FF; mg = 0x0000FF00; mb = 0x00FF0000;
        } else {
          mr = 0x00FF0000; mg = 0x0000FF00; mb = 0x000000FF;
        }
      }
      if (s.version != BmpVersion::kV3 || bitfields) {
        PutU32(b, 54, mr);
        PutU32(b, 58, mg);
        PutU32(b, 62, mb);
      }
      if (s.version != BmpVersion::kV3) {
        PutU32(b, 66, ma);
        PutTag(b, 70, "BGRs");  // 'sRGB' as a little-endian u32
      }
      if (s.version == BmpVersion::kV5) PutU32(b, 122, 4);  // rendering intent
      for (std::size_t i = pixel_offset; i < b.size(); ++i) b[i] = rng.NextByte();
      // Row padding stays zero.
      std::uint64_t used = static_cast<std::uint64_t>(s.width) * (s.bpp / 8);
      for (std::uint64_t r = 0; r < static_cast<std::uint64_t>(s.height); ++r) {
        for (std::uint64_t p = used; p < stride; ++p) b[pixel_offset + r * stride + p] = 0;
      }
      break;
    }
  }
  return b;
}

std::vector<CorpusFile> GenCorpus(const std::vector<FormatSpec>& specs, std::uint64_t seed) {
  if (specs.empty()) throw GenerationError("no specs to generate");
  std::vector<CorpusFile> out;
  out.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CorpusFile f;
    f.spec = specs[i];
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%04zu_", i);
    f.name = prefix + TypeToken(specs[i]) + "_" + SizeLabel(specs[i]) +
             FileExtension(specs[i].format);
    f.bytes = GenerateFile(specs[i], seed * 1000003ULL + i);
    out.push_back(std::move(f));
  }
  return out;
}

FormatSpec RandomSpec(std::string_view token, Lcg& rng, const SizeRange& range) {
  FormatSpec s = ParseTypeToken(token);
  switch (s.format) {
    case Format::kWav:
      s.samples = rng.Range(range.min_samples, range.max_samples);
      s.sample_rate = kSampleRates[rng.Range(0, std::size(kSampleRates) - 1)];
      break;
    case Format::kFwc:
      s.chunk0 = rng.Range(range.min_chunk, range.max_chunk);
      s.chunk1 = rng.Range(range.min_chunk, range.max_chunk);
      break;
    case Format::kBmp:
      s.width = static_cast<std::int32_t>(rng.Range(range.min_dim, range.max_dim));
      s.height = static_cast<std::int32_t>(rng.Range(range.min_dim, range.max_dim));
      break;
  }
  return s;
}

OutputBuffers OracleParse(std::span<const std::uint8_t> f) {
  OutputBuffers out;
  switch (Sniff(f)) {
    case Format::kWav: {
      WavLayout w = DecodeWav(f);
      std::uint64_t frame = w.channels * w.bits / 8;
      for (std::uint32_t c = 0; c < w.channels; ++c) {
        std::vector<std::uint8_t>& buf = out["ch" + std::to_string(c)];
        buf.reserve(w.samples * 8);
        for (std::uint64_t j = 0; j < w.samples; ++j) {
          std::uint64_t at = kWavHeaderSize + j * frame + c * (w.bits / 8);
          std::int64_t v = w.bits == 8
                               ? static_cast<std::int64_t>(f[at]) - 128
                               : static_cast<std::int16_t>(GetU16(f, at));
          PutI64(buf, v);
        }
      }
      break;
    }
    case Format::kFwc: {
      FwcLayout c = DecodeFwc(f);
      auto begin = f.begin() + kFwcHeaderSize;
      out["chunk0"].assign(begin, begin + static_cast<std::ptrdiff_t>(c.len0));
      out["chunk1"].assign(begin + static_cast<std::ptrdiff_t>(c.len0),
                           begin + static_cast<std::ptrdiff_t>(c.len0 + c.len1));
      break;
    }
    case Format::kBmp: {
      BmpLayout b = DecodeBmp(f);
      std::vector<std::uint8_t>& px = out["pixels"];
      px.reserve(b.width * b.height * b.out_bytes());
      for (std::uint64_t y = 0; y < b.height; ++y) {
        std::uint64_t row = b.RowOffset(y);
        for (std::uint64_t x = 0; x < b.width; ++x) {
          std::uint64_t at = row + x * b.in_bytes();
          switch (b.kind) {
            case PixelKind::k555: {
              std::uint32_t v = GetU16(f, at);
              px.push_back(Expand5((v >> 10) & 31));
              px.push_back(Expand5((v >> 5) & 31));
              px.push_back(Expand5(v & 31));
              break;
            }
            case PixelKind::k565: {
              std::uint32_t v = GetU16(f, at);
              px.push_back(Expand5((v >> 11) & 31));
              px.push_back(Expand6((v >> 5) & 63));
              px.push_back(Expand5(v & 31));
              break;
            }
            case PixelKind::kBgr:
              px.insert(px.end(), {f[at + 2], f[at + 1], f[at]});
              break;
            case PixelKind::kBgra:
              px.insert(px.end(), {f[at + 2], f[at + 1], f[at], f[at + 3]});
              break;
            case PixelKind::kRgba:
              px.insert(px.end(), {f[at], f[at + 1], f[at + 2], f[at + 3]});
              break;
          }
        }
      }
      break;
    }
  }
  return out;
}

TracedOutput TracedParse(std::span<const std::uint8_t> f, const std::string& file_id) {
  TracedOutput result;
  TraceLog& log = result.log;
  log.file_id = file_id;
  log.input_length = f.size();
  auto emit = [&](const std::string& array, std::uint64_t index, ByteExpr e) {
    log.entries.push_back(TraceEntry{array, index, std::move(e)});
  };
  switch (Sniff(f)) {
    case Format::kWav: {
      WavLayout w = DecodeWav(f);
      std::uint64_t frame = w.channels * w.bits / 8;
      for (std::uint32_t c = 0; c < w.channels; ++c) {
        std::string name = "ch" + std::to_string(c);
        for (std::uint64_t j = 0; j < w.samples; ++j) {
          std::uint64_t at = kWavHeaderSize + j * frame + c * (w.bits / 8);
          for (unsigned k = 0; k < 8; ++k) emit(name, j * 8 + k, SampleByte(w, at, k));
        }
      }
      break;
    }
    case Format::kFwc: {
      FwcLayout c = DecodeFwc(f);
      for (std::uint64_t i = 0; i < c.len0; ++i) {
        emit("chunk0", i, ByteExpr::Read(kFwcHeaderSize + i));
      }
      for (std::uint64_t i = 0; i < c.len1; ++i) {
        emit("chunk1", i, ByteExpr::Read(kFwcHeaderSize + c.len0 + i));
      }
      break;
    }
    case Format::kBmp: {
      BmpLayout b = DecodeBmp(f);
      std::uint64_t out_index = 0;
      auto put = [&](ByteExpr e) { emit("pixels", out_index++, std::move(e)); };
      for (std::uint64_t y = 0; y < b.height; ++y) {
        std::uint64_t row = b.RowOffset(y);
        for (std::uint64_t x = 0; x < b.width; ++x) {
          std::uint64_t at = row + x * b.in_bytes();
          switch (b.kind) {
            case PixelKind::k555:
              put(Channel(at, 0x7C00, 10, 33, 2));
              put(Channel(at, 0x03E0, 5, 33, 2));
              put(Channel(at, 0x001F, 0, 33, 2));
              break;
            case PixelKind::k565:
              put(Channel(at, 0xF800, 11, 33, 2));
              put(Channel(at, 0x07E0, 5, 65, 4));
              put(Channel(at, 0x001F, 0, 33, 2));
              break;
            case PixelKind::kBgr:
              for (unsigned c : {2u, 1u, 0u}) put(ByteExpr::Read(at + c));
              break;
            case PixelKind::kBgra:
              for (unsigned c : {2u, 1u, 0u, 3u}) put(ByteExpr::Read(at + c));
              break;
            case PixelKind::kRgba:
              for (unsigned c : {0u, 1u, 2u, 3u}) put(ByteExpr::Read(at + c));
              break;
          }
        }
      }
      break;
    }
  }
  result.output = ReplayTrace(log, f);
  return result;
}

}  // namespace parsegen
