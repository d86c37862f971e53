#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anisograph/error.hpp"

namespace anisograph::detail {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written with native little-endian stores");

class ByteWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void u64s(std::span<const std::uint64_t> v) { raw(v.data(), v.size_bytes()); }
  void f64s(std::span<const double> v) { raw(v.data(), v.size_bytes()); }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view m) {
    if (remaining() < m.size()) throw FormatError("truncated: missing magic", pos_);
    if (std::memcmp(bytes_.data() + pos_, m.data(), m.size()) != 0) throw FormatError("bad magic", pos_);
    pos_ += m.size();
  }
  void expect_version(std::uint32_t supported) {
    const auto at = pos_;
    const auto v = u32();
    if (v != supported) {
      throw FormatError("unsupported version " + std::to_string(v), at);
    }
  }
  std::uint8_t u8() { return scalar<std::uint8_t>(); }
  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  double f64() { return scalar<double>(); }

  std::vector<std::uint64_t> u64s(std::uint64_t count) { return array<std::uint64_t>(count); }
  std::vector<double> f64s(std::uint64_t count) { return array<double>(count); }

  bool at_end() const noexcept { return pos_ == bytes_.size(); }
  bool peek_magic(std::string_view m) const {
    return bytes_.size() - pos_ >= m.size() && std::memcmp(bytes_.data() + pos_, m.data(), m.size()) == 0;
  }
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  template <typename T>
  T scalar() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <typename T>
  std::vector<T> array(std::uint64_t count) {
    if (count > remaining() / sizeof(T)) throw FormatError("truncated array", pos_);
    std::vector<T> v(count);
    std::memcpy(v.data(), bytes_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    return v;
  }
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("truncated", pos_);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace anisograph::detail
