#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poasim {

/// 256-bit digest. All ledger hashing is SHA-256.
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);

/// Digest of the concatenation left || right.
Digest sha256_pair(const Digest& left, const Digest& right);

std::string to_hex(const Digest& digest);
/// Throws std::invalid_argument on malformed input.
Digest digest_from_hex(std::string_view hex);

inline constexpr Digest kZeroDigest{};

/// Canonical big-endian writer: fixed-width integers, u32 length prefixes for
/// variable fields, doubles as their IEEE-754 bit pattern.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::span<const std::uint8_t> data);  // length-prefixed
  void digest(const Digest& d) { bytes(d); }
  void str(std::string_view s);

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Inverse of ByteWriter. Every read throws std::out_of_range when the input
/// is exhausted and std::invalid_argument on a bad length prefix.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::vector<std::uint8_t> bytes();
  Digest digest();
  std::string str();

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace poasim
