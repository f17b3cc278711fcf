#pragma once

// Little-endian byte packing for snapshots. Doubles travel as their IEEE 754
// bit patterns, so a round trip is exact.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "dpmat/errors.hpp"

namespace dpmat {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { append_le(v); }
  void u32(std::uint32_t v) { append_le(v); }
  void u64(std::uint64_t v) { append_le(v); }
  void f64(double v) { append_le(std::bit_cast<std::uint64_t>(v)); }

  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  template <typename T>
  void append_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  explicit ByteReader(const std::vector<std::uint8_t>& v)
      : ByteReader(v.data(), v.size()) {}

  std::uint8_t u8() { return take_le<std::uint8_t>(); }
  std::uint16_t u16() { return take_le<std::uint16_t>(); }
  std::uint32_t u32() { return take_le<std::uint32_t>(); }
  std::uint64_t u64() { return take_le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(take_le<std::uint64_t>()); }

  std::string str() {
    std::uint32_t len = u32();
    require(len);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
    pos_ += len;
    return s;
  }

  std::size_t remaining() const { return n_ - pos_; }
  bool done() const { return pos_ == n_; }

  void require(std::size_t n) const {
    if (n_ - pos_ < n) {
      throw CorruptPayloadError("snapshot truncated: need " +
                                std::to_string(n) + " bytes, have " +
                                std::to_string(n_ - pos_));
    }
  }

 private:
  template <typename T>
  T take_le() {
    require(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v = static_cast<T>(v | (static_cast<T>(p_[pos_ + i]) << (8 * i)));
    }
    pos_ += sizeof(T);
    return v;
  }

  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace dpmat
