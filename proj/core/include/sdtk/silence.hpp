// core/include/sdtk/silence.hpp

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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdtk/audio_io.hpp"
#include "sdtk/features.hpp"
#include "sdtk/gmm_hmm.hpp"

namespace sdtk {

enum class RegionKind { kLeading, kInternal, kTrailing };

const char *to_string(RegionKind kind);

struct SilenceRegion {
  TimeInterval interval;
  RegionKind kind = RegionKind::kInternal;
  bool operator==(const SilenceRegion &) const = default;
};

/// How much of each silence region to keep.
///
/// Internal regions longer than `delta_t` lose their middle part: half of
/// `delta_t` is kept at each border, so a (2 s, 4 s) region with
/// delta_t = 0.5 s loses (2.25 s, 3.75 s). Regions no longer than
/// `delta_t`, or shorter than `min_region`, are kept intact. Leading and
/// trailing regions are dropped whole when `remove_boundary_silence` is
/// set and otherwise treated like internal ones.
struct TrimPolicy {
  double delta_t = 0.5;
  double min_region = 0.0;
  bool remove_boundary_silence = true;

  void validate() const;
  bool operator==(const TrimPolicy &) const = default;
};

struct ThresholdParams {
  double threshold_db = -40.0;  // dBFS, RMS of a full-scale constant = 0 dB
  double min_duration = 0.25;   // seconds
  double frame_length = 0.010;  // seconds

  void validate() const;
  bool operator==(const ThresholdParams &) const = default;
};

/// Maximal runs of RMS frames below the threshold lasting at least
/// min_duration. An entirely silent input yields one leading region.
std::vector<SilenceRegion> detect_threshold_silence(const AudioBuffer &audio,
                                                    const ThresholdParams &params = {});

/// Maximal runs of frames aligned to the silence phone. A run over frames
/// [a, b] spans (a * shift, (b + 1) * shift); when `audio_duration` is
/// given, a trailing run is extended to it so that the audio tail past the
/// last full frame is covered.
std::vector<SilenceRegion> silence_regions_from_alignment(
    const Alignment &ali, std::optional<double> audio_duration = std::nullopt);

struct TrimResult {
  AudioBuffer audio;
  std::vector<TimeInterval> removed;
};

/// Throws BoundsError when a region falls outside the audio.
TrimResult trim_silence(const AudioBuffer &audio, std::span<const SilenceRegion> regions,
                        const TrimPolicy &policy);

enum class SilenceMethod { kThreshold, kAlignment };

SilenceMethod parse_silence_method(const std::string &name);
const char *to_string(SilenceMethod method);

struct PreprocessOptions {
  SilenceMethod method = SilenceMethod::kAlignment;
  ThresholdParams threshold;
  TrimPolicy policy;
  FeatureConfig features;
  // Required for the alignment method.
  const GmmHmmModel *model = nullptr;
  const Lexicon *lexicon = nullptr;
  std::filesystem::path out_dir;
  int jobs = 1;
};

struct UtteranceTrimReport {
  std::string id;
  std::string status;  // "ok", "all_silence" or "failed"
  std::string error;
  double input_seconds = 0.0;
  double output_seconds = 0.0;
  std::vector<TimeInterval> removed;
};

struct PreprocessReport {
  std::string method;
  double delta_t = 0.0;
  std::vector<UtteranceTrimReport> utterances;
  double input_seconds = 0.0;
  double output_seconds = 0.0;
  double removed_seconds = 0.0;
  size_t failed = 0;

  /// More than 1% of the utterances failed.
  bool failure_rate_exceeded() const;
};

/// Trims every utterance of `manifest` and writes, under out_dir,
/// audio/<id>.wav, manifest.jsonl and report.json. The alignment method
/// also writes the alignments it used to alignments/<id>.ctm. Failing
/// utterances are logged and left out of the output manifest; all-silence
/// utterances are written as empty audio with a manifest warning.
PreprocessReport preprocess_corpus(const CorpusManifest &manifest,
                                   const PreprocessOptions &options);

void write_preprocess_report(const std::filesystem::path &path, const PreprocessReport &report);

}  // namespace sdtk
