// tests/test_util.hpp

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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sdtk/audio_io.hpp"

namespace sdtk::testing {

// Seeded generator for hand-rolled property tests. Draws are built from
// raw 64-bit outputs so they are identical across standard libraries.
class Gen {
 public:
  explicit Gen(uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  size_t below(size_t n) { return static_cast<size_t>(uniform() * static_cast<double>(n)); }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<size_t>(hi - lo + 1))); }
  bool coin() { return (eng_() >> 63) != 0; }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  // A probability vector of length n with every entry > 0.
  std::vector<double> simplex(size_t n) {
    std::vector<double> p(n);
    double s = 0.0;
    for (auto &v : p) s += (v = 0.05 + uniform());
    for (auto &v : p) v /= s;
    return p;
  }

 private:
  std::mt19937_64 eng_;
};

class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sdtk_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline AudioBuffer sine(double freq, double amplitude, double seconds, int sr = 16000) {
  AudioBuffer a;
  a.sample_rate = sr;
  size_t n = static_cast<size_t>(std::llround(seconds * sr));
  a.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    a.samples[i] = static_cast<float>(amplitude * std::sin(2 * std::numbers::pi * freq * i / sr));
  return a;
}

inline AudioBuffer constant(float value, double seconds, int sr = 16000) {
  AudioBuffer a;
  a.sample_rate = sr;
  a.samples.assign(static_cast<size_t>(std::llround(seconds * sr)), value);
  return a;
}

inline void append(AudioBuffer &dst, const AudioBuffer &src) {
  dst.samples.insert(dst.samples.end(), src.samples.begin(), src.samples.end());
}

}  // namespace sdtk::testing
