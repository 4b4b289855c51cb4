#pragma once

// Little-endian primitive I/O shared by the OPEMB and OPCKP readers/writers.
// Internal to the library; not installed.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "orthoprobe/errors.hpp"

namespace ortho::io {

struct Reader {
  std::istream& in;
  std::uint64_t offset = 0;

  std::uint8_t u8(const char* what) {
    const int c = in.get();
    if (c == std::istream::traits_type::eof()) {
      throw FormatError(std::string("truncated while reading ") + what, offset);
    }
    ++offset;
    return static_cast<std::uint8_t>(c);
  }

  std::uint32_t u32(const char* what) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8(what)) << (8 * i);
    return v;
  }

  std::uint64_t u64(const char* what) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8(what)) << (8 * i);
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

struct Writer {
  std::ostream& out;

  void u8(std::uint8_t v) { out.put(static_cast<char>(v)); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

}  // namespace ortho::io
