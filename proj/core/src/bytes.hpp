#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "kgamc/error.hpp"

// Little-endian encoding helpers shared by the binary containers.
namespace kgamc::detail {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { little(v, 2); }
  void i16(std::int16_t v) { little(static_cast<std::uint16_t>(v), 2); }
  void u32(std::uint32_t v) { little(v, 4); }
  void f32(float v) { little(std::bit_cast<std::uint32_t>(v), 4); }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }

 private:
  void little(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& in, const char* container) : in_(in), container_(container) {}

  std::size_t offset() const { return pos_; }
  std::uint8_t u8() { return static_cast<std::uint8_t>(little(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(little(2)); }
  std::int16_t i16() { return static_cast<std::int16_t>(static_cast<std::uint16_t>(little(2))); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little(4)); }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(little(4))); }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw FormatError(std::string("truncated ") + container_ + " data: need " + std::to_string(n) + " more bytes", pos_);
    }
  }

 private:
  std::uint64_t little(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  const std::vector<std::uint8_t>& in_;
  const char* container_;
  std::size_t pos_ = 0;
};

}  // namespace kgamc::detail
