#pragma once
// Self-delimiting description layout:
//   "EDC1" | version u8 | codec u2 | ell u14 | codec header | payload | CRC-24 of all preceding bits
// followed by zero bits up to the next byte boundary.

#include "edc/bitstream.hpp"

#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

namespace edc {

enum class CodecId : unsigned { Poly = 0, Analytic = 1, Rand = 2, Ck = 3 };

inline std::string codec_name(CodecId c) {
  switch (c) {
    case CodecId::Poly:
      return "poly";
    case CodecId::Analytic:
      return "analytic";
    case CodecId::Rand:
      return "rand";
    case CodecId::Ck:
      return "ck";
  }
  return "?";
}

inline CodecId parse_codec(const std::string& s) {
  for (auto c : {CodecId::Poly, CodecId::Analytic, CodecId::Rand, CodecId::Ck}) {
    if (codec_name(c) == s) return c;
  }
  throw validation_error("unknown codec '" + s + "' (expected poly, analytic, rand or ck)");
}

inline constexpr unsigned kDescriptionVersion = 1;
inline constexpr unsigned kFrameBits = 32 + 8 + 2 + 14;
inline constexpr unsigned kMaxEll = 60;

struct Description {
  CodecId codec = CodecId::Poly;
  unsigned ell = 0;
  std::vector<std::uint8_t> bytes;
  std::size_t total_bits = 0;   // every bit up to and including the checksum
  std::size_t header_bits = 0;  // codec header only
  std::size_t payload_bits = 0;
  unsigned nbar = 0;
  std::vector<std::pair<std::string, std::string>> params;  // encoder-side report, not serialized
};

namespace detail {

inline BitWriter begin_frame(CodecId codec, unsigned ell) {
  if (ell < 1 || ell > kMaxEll) throw validation_error("eps exponent must lie in [1, " + std::to_string(kMaxEll) + "]");
  BitWriter w;
  for (char ch : std::string("EDC1")) w.put(static_cast<std::uint8_t>(ch), 8);
  w.put(kDescriptionVersion, 8);
  w.put(static_cast<unsigned>(codec), 2);
  w.put(ell, 14);
  return w;
}

inline Description finish_frame(BitWriter& w, CodecId codec, unsigned ell, std::size_t header_end) {
  std::size_t payload_end = w.bit_count();
  w.put_crc();
  Description d;
  d.codec = codec;
  d.ell = ell;
  d.total_bits = w.bit_count();
  d.header_bits = header_end - kFrameBits;
  d.payload_bits = payload_end - header_end;
  d.bytes = w.bytes();
  return d;
}

struct Frame {
  CodecId codec;
  unsigned ell;
};

inline Frame read_frame(BitReader& r) {
  for (char ch : std::string("EDC1")) {
    if (r.get(8) != static_cast<std::uint8_t>(ch)) throw format_error("bad magic: not an EDC1 description");
  }
  auto version = static_cast<unsigned>(r.get(8));
  if (version != kDescriptionVersion) throw format_error("unsupported description version " + std::to_string(version));
  auto codec = static_cast<CodecId>(r.get(2));
  auto ell = static_cast<unsigned>(r.get(14));
  if (ell < 1 || ell > kMaxEll) throw format_error("eps exponent out of range");
  return {codec, ell};
}

}  // namespace detail

/// Codec and eps exponent of a serialized description.
inline detail::Frame peek_frame(std::span<const std::uint8_t> bytes) {
  BitReader r(bytes);
  return detail::read_frame(r);
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Error::Kind::Io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Error::Kind::Io, "write to '" + path + "' failed");
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Kind::Io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace edc
