#pragma once
// Big-endian bit packing, Elias-gamma integers and a bitwise CRC-24.

#include "edc/rational.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace edc {

/// CRC-24 with the OpenPGP parameters (poly 0x864CFB, init 0xB704CE), fed one bit at a time,
/// most significant bit first. Feeding whole bytes gives the standard CRC-24/OPENPGP value.
class Crc24 {
 public:
  void push_bit(bool bit) {
    bool top = ((state_ >> 23) & 1U) != 0;
    state_ = (state_ << 1) & 0xFFFFFFU;
    if (top != bit) state_ ^= 0x864CFBU;
  }
  std::uint32_t value() const { return state_; }

 private:
  std::uint32_t state_ = 0xB704CEU;
};

class BitWriter {
 public:
  void put_bit(bool bit) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ % 8));
    ++bits_;
  }

  void put(std::uint64_t value, unsigned width) {
    if (width < 64 && (value >> width) != 0) throw format_error("value does not fit in field width");
    for (unsigned i = width; i-- > 0;) put_bit(((value >> i) & 1U) != 0);
  }

  void put_signed(std::int64_t value, unsigned width) {
    std::int64_t lo = -(std::int64_t{1} << (width - 1));
    std::int64_t hi = (std::int64_t{1} << (width - 1)) - 1;
    if (value < lo || value > hi) throw format_error("signed value does not fit in field width");
    put(static_cast<std::uint64_t>(value) & ((std::uint64_t{1} << width) - 1), width);
  }

  void put_big(const Integer& value, unsigned width) {
    if (value < 0) throw format_error("negative value in unsigned field");
    if (width == 0) {
      if (value != 0) throw format_error("non-zero value in zero-width field");
      return;
    }
    if (mpz_sizeinbase(value.get_mpz_t(), 2) > width && value != 0) throw format_error("value does not fit in field");
    for (unsigned i = width; i-- > 0;) put_bit(mpz_tstbit(value.get_mpz_t(), i) != 0);
  }

  /// Elias gamma code for n >= 1.
  void put_gamma(std::uint64_t n) {
    if (n == 0) throw format_error("Elias gamma needs n >= 1");
    unsigned len = 0;
    for (std::uint64_t t = n; t > 1; t >>= 1) ++len;
    for (unsigned i = 0; i < len; ++i) put_bit(false);
    put(n, len + 1);
  }

  /// Appends the CRC-24 of every bit written so far.
  void put_crc() {
    Crc24 crc;
    for (std::size_t i = 0; i < bits_; ++i) crc.push_bit(bit_at(i));
    put(crc.value(), 24);
  }

  bool bit_at(std::size_t i) const { return ((bytes_[i / 8] >> (7 - i % 8)) & 1U) != 0; }
  std::size_t bit_count() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_limit)
      : bytes_(bytes), limit_(std::min(bit_limit, bytes.size() * 8)) {}
  explicit BitReader(std::span<const std::uint8_t> bytes) : BitReader(bytes, bytes.size() * 8) {}

  bool get_bit() {
    if (pos_ >= limit_) throw format_error("truncated payload");
    bool b = ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1U) != 0;
    crc_.push_bit(b);
    ++pos_;
    return b;
  }

  std::uint64_t get(unsigned width) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i) v = (v << 1) | (get_bit() ? 1U : 0U);
    return v;
  }

  std::int64_t get_signed(unsigned width) {
    std::uint64_t raw = get(width);
    if (width < 64 && ((raw >> (width - 1)) & 1U)) raw |= ~((std::uint64_t{1} << width) - 1);
    return static_cast<std::int64_t>(raw);
  }

  Integer get_big(unsigned width) {
    Integer v(0);
    for (unsigned i = 0; i < width; ++i) {
      v <<= 1;
      if (get_bit()) v += 1;
    }
    return v;
  }

  std::uint64_t get_gamma() {
    unsigned zeros = 0;
    while (!get_bit()) {
      if (++zeros > 63) throw format_error("malformed Elias gamma code");
    }
    std::uint64_t v = 1;
    for (unsigned i = 0; i < zeros; ++i) v = (v << 1) | (get_bit() ? 1U : 0U);
    return v;
  }

  /// Reads the trailing 24-bit checksum and compares it with the CRC of everything read before it.
  void check_crc() {
    std::uint32_t expected = crc_.value();
    std::uint32_t stored = static_cast<std::uint32_t>(get(24));
    if (stored != expected) throw format_error("checksum mismatch");
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
  Crc24 crc_;
};

}  // namespace edc
