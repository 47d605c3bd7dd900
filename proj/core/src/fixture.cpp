// core/src/fixture.cpp

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

#include "sdtk/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace sdtk {

namespace {

struct PhoneTone {
  const char *name;
  double f1, f2;
};

constexpr PhoneTone kPhones[] = {
    {"aa", 400, 1200}, {"iy", 250, 2600}, {"s", 4500, 6000}, {"t", 3000, 5200},
    {"m", 200, 1800},  {"n", 600, 3400},  {"k", 1500, 7000}, {"r", 800, 2000},
};

struct Word {
  const char *spelling;
  std::vector<int> phones;
};

const std::vector<Word> &words() {
  static const std::vector<Word> kWords = {
      {"sat", {2, 0, 3}}, {"mat", {4, 0, 3}}, {"kit", {6, 1, 3}},  {"see", {2, 1}},
      {"tree", {3, 7, 1}}, {"nam", {5, 0, 4}}, {"rim", {7, 1, 4}}, {"skin", {2, 6, 1, 5}},
      {"ran", {7, 0, 5}}, {"tin", {3, 1, 5}},
  };
  return kWords;
}

// Portable uniform draws: std::uniform_real_distribution is not specified
// bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(uniform() * n); }

 private:
  std::mt19937_64 gen_;
};

struct Segment {
  int phone = -1;  // -1 for silence
  double seconds = 0.0;
};

}  // namespace

FixtureCorpus make_fixture_corpus(const FixtureSpec &spec) {
  FixtureCorpus corpus;
  for (const auto &w : words()) {
    Pronunciation pron;
    for (size_t i = 0; i < w.phones.size(); ++i) {
      std::string p = kPhones[w.phones[i]].name;
      if (i + 1 == w.phones.size()) p += kEowMarker;
      pron.push_back(p);
    }
    corpus.lexicon.add(w.spelling, pron);
  }

  Rng rng(spec.seed);
  const int sr = spec.sample_rate;
  for (int u = 0; u < spec.num_utterances; ++u) {
    std::vector<Segment> segs;
    std::vector<const Word *> chosen;
    std::vector<int> long_after;  // word index followed by a long pause
    while (true) {
      segs.clear();
      chosen.clear();
      long_after.clear();
      int n_words = 4 + rng.below(2);
      for (int i = 0; i < n_words; ++i) chosen.push_back(&words()[rng.below(10)]);
      int n_long = 1 + rng.below(2);
      while (static_cast<int>(long_after.size()) < n_long) {
        int pos = rng.below(n_words - 1);
        if (std::find(long_after.begin(), long_after.end(), pos) == long_after.end())
          long_after.push_back(pos);
      }
      segs.push_back({-1, rng.uniform(0.3, 0.5)});
      for (int i = 0; i < n_words; ++i) {
        for (int p : chosen[i]->phones) segs.push_back({p, rng.uniform(0.10, 0.16)});
        if (i + 1 == n_words) break;
        bool is_long = std::find(long_after.begin(), long_after.end(), i) != long_after.end();
        if (is_long)
          segs.push_back({-1, rng.uniform(1.2, n_long == 1 ? 2.5 : 1.8)});
        else if (rng.uniform() < 0.5)
          segs.push_back({-1, rng.uniform(0.05, 0.15)});
      }
      double used = 0.0;
      for (const auto &s : segs) used += s.seconds;
      if (spec.utterance_seconds - used >= 0.3) {
        segs.push_back({-1, spec.utterance_seconds - used});
        break;
      }
    }

    FixtureUtterance utt;
    utt.id = fmt::format("fx{:03d}", u);
    for (size_t i = 0; i < chosen.size(); ++i) utt.text += (i ? " " : "") + std::string(chosen[i]->spelling);
    utt.audio.sample_rate = sr;
    const size_t total = static_cast<size_t>(std::llround(spec.utterance_seconds * sr));
    utt.audio.samples.reserve(total);
    double t = 0.0;
    for (const auto &s : segs) {
      size_t begin = seconds_to_sample(t, sr);
      size_t end = std::min(total, seconds_to_sample(t + s.seconds, sr));
      if (s.phone < 0) {
        TimeInterval iv{static_cast<double>(begin) / sr, static_cast<double>(end) / sr};
        utt.silences.push_back(iv);
        if (s.seconds >= 1.2) utt.long_pauses.push_back(iv);
      }
      for (size_t n = begin; n < end; ++n) {
        double x = spec.noise_amplitude * rng.uniform(-1.0, 1.0);
        if (s.phone >= 0) {
          const auto &ph = kPhones[s.phone];
          double tt = static_cast<double>(n - begin) / sr;
          x += 0.5 * spec.tone_amplitude *
               (std::sin(2 * std::numbers::pi * ph.f1 * tt) + std::sin(2 * std::numbers::pi * ph.f2 * tt));
        }
        utt.audio.samples.push_back(static_cast<float>(x));
      }
      t += s.seconds;
    }
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

void write_fixture_corpus(const std::filesystem::path &dir, const FixtureCorpus &corpus) {
  std::filesystem::create_directories(dir / "audio");
  CorpusManifest manifest;
  manifest.base_dir = dir;
  for (const auto &u : corpus.utterances) {
    std::string rel = "audio/" + u.id + ".wav";
    write_wav(dir / rel, u.audio);
    manifest.entries.push_back(ManifestEntry{u.id, rel, u.text, "synth", std::nullopt});
  }
  write_manifest(dir / "manifest.jsonl", manifest);
  std::ofstream os(dir / "lexicon.txt");
  write_lexicon(os, corpus.lexicon);
}

}  // namespace sdtk
