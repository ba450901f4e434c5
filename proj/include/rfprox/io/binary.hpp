#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "rfprox/errors.hpp"

namespace rfprox::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
  requires std::is_arithmetic_v<T>
void write(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void write_string(std::ostream& out, const std::string& s) {
  write<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
  requires std::is_arithmetic_v<T>
T read(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw FormatError("unexpected end of file");
  return value;
}

inline std::string read_string(std::istream& in, std::uint32_t max_len = 1u << 24) {
  const auto len = read<std::uint32_t>(in);
  if (len > max_len) throw FormatError("string length out of range");
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) throw FormatError("unexpected end of file");
  return s;
}

}  // namespace rfprox::io
