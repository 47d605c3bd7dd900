// core/include/sdtk/fixture.hpp

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
#include <string>
#include <vector>

#include "sdtk/audio_io.hpp"
#include "sdtk/lexicon.hpp"

namespace sdtk {

// Synthetic corpus with known silence spans. Every phone is a steady pair
// of sinusoids; silence is low-level uniform noise. Utterances place long
// pauses between words so that silence trimming has something to remove.
struct FixtureSpec {
  uint64_t seed = 1234;
  int num_utterances = 10;
  double utterance_seconds = 6.0;
  int sample_rate = 16000;
  double tone_amplitude = 0.3;
  double noise_amplitude = 0.001;
};

struct FixtureUtterance {
  std::string id;
  std::string text;
  AudioBuffer audio;
  // Constructed silence spans in time order, boundary ones included.
  std::vector<TimeInterval> silences;
  // Pauses long enough to count as unaligned duration.
  std::vector<TimeInterval> long_pauses;
};

struct FixtureCorpus {
  Lexicon lexicon;
  std::vector<FixtureUtterance> utterances;
};

FixtureCorpus make_fixture_corpus(const FixtureSpec &spec = {});

/// Writes audio/<id>.wav, manifest.jsonl and lexicon.txt under `dir`.
void write_fixture_corpus(const std::filesystem::path &dir, const FixtureCorpus &corpus);

}  // namespace sdtk
