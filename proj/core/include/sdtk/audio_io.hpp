// core/include/sdtk/audio_io.hpp

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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sdtk {

/// Mono PCM audio with samples scaled to [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 16000;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const AudioBuffer &) const = default;
};

/// Half-open time span in seconds, end > start >= 0.
struct TimeInterval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool operator==(const TimeInterval &) const = default;
};

/// Half-open sample index range [begin, end).
struct SampleRange {
  size_t begin = 0;
  size_t end = 0;

  size_t length() const { return end - begin; }
  bool operator==(const SampleRange &) const = default;
};

enum class WavEncoding { kPcm16, kFloat32 };

// Time to sample index, rounding half up at one-sample resolution.
size_t seconds_to_sample(double seconds, int sample_rate);

/// Reads a RIFF/WAVE file holding PCM16 or IEEE float32 samples, mono or
/// stereo. Stereo input is downmixed by averaging the two channels.
AudioBuffer load_wav(const std::filesystem::path &path);
AudioBuffer read_wav(std::istream &is, const std::string &what = "<stream>");

void write_wav(const std::filesystem::path &path, const AudioBuffer &audio,
               WavEncoding encoding = WavEncoding::kPcm16);
void write_wav(std::ostream &os, const AudioBuffer &audio,
               WavEncoding encoding = WavEncoding::kPcm16);

/// Removes the given sorted, non-overlapping sample ranges and returns the
/// concatenation of what remains.
AudioBuffer cut_sample_ranges(const AudioBuffer &audio,
                              std::span<const SampleRange> remove);

/// Time-domain wrapper over cut_sample_ranges; interval borders are mapped
/// to samples with seconds_to_sample. Throws BoundsError when an interval
/// is inverted, unsorted, overlapping, or outside [0, duration].
AudioBuffer cut_intervals(const AudioBuffer &audio,
                          std::span<const TimeInterval> remove);

std::vector<SampleRange> intervals_to_ranges(std::span<const TimeInterval> intervals,
                                             const AudioBuffer &audio);

struct ManifestEntry {
  std::string id;
  std::string audio;
  std::string text;
  std::optional<std::string> speaker;
  std::optional<std::string> warning;

  bool operator==(const ManifestEntry &) const = default;
};

/// JSON-lines corpus listing. Audio paths are kept as written; relative
/// paths resolve against `base_dir` (the manifest's directory).
struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path audio_path(const ManifestEntry &e) const;
};

CorpusManifest load_manifest(const std::filesystem::path &path);
CorpusManifest parse_manifest(std::istream &is, const std::string &what = "<stream>");
void write_manifest(const std::filesystem::path &path, const CorpusManifest &manifest);

}  // namespace sdtk
