// core/include/sdtk/binary_io.hpp

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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sdtk/error.hpp"

namespace sdtk {

// Little-endian primitive encoding shared by the feature, posterior and
// model file formats. Independent of host byte order.
class LeWriter {
 public:
  explicit LeWriter(std::ostream &os) : os_(os) {}

  void bytes(std::span<const char> data);
  void u16(uint16_t v);
  void u32(uint32_t v);
  void f32(float v);
  void f64(double v);
  void str(const std::string &s);  // u32 length, then raw bytes

 private:
  std::ostream &os_;
};

class LeReader {
 public:
  LeReader(std::istream &is, std::string what) : is_(is), what_(std::move(what)) {}

  void bytes(std::span<char> out);
  uint16_t u16();
  uint32_t u32();
  float f32();
  double f64();
  std::string str();

 private:
  std::istream &is_;
  std::string what_;
};

}  // namespace sdtk
