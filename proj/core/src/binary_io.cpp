// core/src/binary_io.cpp

// Copyright 2026  The sdtk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "sdtk/binary_io.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>

namespace sdtk {

namespace {

template <typename U>
void put_le(std::ostream &os, U v) {
  std::array<char, sizeof(U)> buf;
  for (size_t i = 0; i < sizeof(U); ++i)
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf.data(), buf.size());
}

template <typename U>
U get_le(std::istream &is, const std::string &what) {
  std::array<unsigned char, sizeof(U)> buf;
  is.read(reinterpret_cast<char *>(buf.data()), buf.size());
  if (!is) throw ParseError(what + ": unexpected end of file");
  U v = 0;
  for (size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void LeWriter::bytes(std::span<const char> data) {
  os_.write(data.data(), static_cast<std::streamsize>(data.size()));
}
void LeWriter::u16(uint16_t v) { put_le(os_, v); }
void LeWriter::u32(uint32_t v) { put_le(os_, v); }
void LeWriter::f32(float v) { put_le(os_, std::bit_cast<uint32_t>(v)); }
void LeWriter::f64(double v) { put_le(os_, std::bit_cast<uint64_t>(v)); }
void LeWriter::str(const std::string &s) {
  u32(static_cast<uint32_t>(s.size()));
  bytes(s);
}

void LeReader::bytes(std::span<char> out) {
  is_.read(out.data(), static_cast<std::streamsize>(out.size()));
  if (!is_) throw ParseError(what_ + ": unexpected end of file");
}
uint16_t LeReader::u16() { return get_le<uint16_t>(is_, what_); }
uint32_t LeReader::u32() { return get_le<uint32_t>(is_, what_); }
float LeReader::f32() { return std::bit_cast<float>(get_le<uint32_t>(is_, what_)); }
double LeReader::f64() { return std::bit_cast<double>(get_le<uint64_t>(is_, what_)); }
std::string LeReader::str() {
  uint32_t n = u32();
  if (n > (1u << 24)) throw ParseError(what_ + ": implausible string length");
  std::string s(n, '\0');
  bytes(s);
  return s;
}

}  // namespace sdtk
