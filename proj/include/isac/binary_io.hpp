#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isac/error.hpp"

namespace isac {

static_assert(std::endian::native == std::endian::little, "container encoding assumes a little-endian host");

/// Append-only little-endian encoder.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void tag(std::string_view four_cc) { buf_.append(four_cc.substr(0, 4)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void f64s(std::span<const double> values) {
    u32(static_cast<std::uint32_t>(values.size()));
    raw(values.data(), values.size() * sizeof(double));
  }
  void bytes(std::string_view b) { buf_.append(b); }

  const std::string& data() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  std::string buf_;
};

/// Bounds-checked decoder; every read past the end throws FormatError.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::int32_t i32() { return pod<std::int32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  std::string_view tag() { return take(4); }
  std::string str() { return std::string(take(u32())); }
  std::vector<double> f64s() {
    const std::uint32_t n = u32();
    const auto raw = take(static_cast<std::size_t>(n) * sizeof(double));
    std::vector<double> v(raw.size() / sizeof(double));
    std::memcpy(v.data(), raw.data(), raw.size());
    return v;
  }
  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw FormatError("truncated data");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  template <typename T>
  T pod() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return v;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace isac
