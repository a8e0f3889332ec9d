#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ledgerml {

using Bytes = std::vector<std::uint8_t>;

/// Appends big-endian integers and length-prefixed strings to a byte buffer.
/// All on-disk and hashed encodings in this library are built with it.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void raw(std::span<const std::uint8_t> bytes);
  /// u32 length followed by the bytes.
  void str(std::string_view s);

  [[nodiscard]] const Bytes& bytes() const& noexcept { return buf_; }
  [[nodiscard]] Bytes take() && noexcept { return std::move(buf_); }

 private:
  Bytes buf_;
};

/// Reads what ByteWriter wrote. Throws Error(DecodeError) on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::span<const std::uint8_t> raw(std::size_t n);
  std::string str();

  [[nodiscard]] bool done() const noexcept { return pos_ == data_.size(); }
  [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws Error(DecodeError) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

}  // namespace ledgerml
