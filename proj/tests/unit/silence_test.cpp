// tests/unit/silence_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "sdtk/alignment_io.hpp"
#include "sdtk/error.hpp"
#include "sdtk/fixture.hpp"
#include "sdtk/silence.hpp"
#include "test_util.hpp"

namespace sdtk {
namespace {

using testing::Gen;
using testing::TempDir;

constexpr int kRate = 16000;
const double kSample = 1.0 / kRate;

AudioBuffer ramp(double seconds) {
  AudioBuffer a;
  a.sample_rate = kRate;
  a.samples.resize(seconds_to_sample(seconds, kRate));
  for (size_t i = 0; i < a.size(); ++i) a.samples[i] = static_cast<float>(i % 1000) / 1000.0f;
  return a;
}

TEST(TrimPolicy, HalfDeltaPerSide) {
  AudioBuffer a = ramp(6.0);
  std::vector<SilenceRegion> r = {{{2.0, 4.0}, RegionKind::kInternal}};
  TrimResult half = trim_silence(a, r, {0.5, 0.0, true});
  ASSERT_EQ(half.removed.size(), 1u);
  EXPECT_NEAR(half.removed[0].start, 2.25, kSample);
  EXPECT_NEAR(half.removed[0].end, 3.75, kSample);
  EXPECT_EQ(half.audio.size(), a.size() - 24000);

  TrimResult all = trim_silence(a, r, {0.0, 0.0, true});
  ASSERT_EQ(all.removed.size(), 1u);
  EXPECT_NEAR(all.removed[0].start, 2.0, kSample);
  EXPECT_NEAR(all.removed[0].end, 4.0, kSample);
  EXPECT_EQ(all.audio.size(), a.size() - 32000);
}

TEST(TrimPolicy, BoundaryRegionsRemovedWhole) {
  AudioBuffer a = ramp(5.0);
  std::vector<SilenceRegion> r = {{{0.0, 1.0}, RegionKind::kLeading},
                                  {{4.2, 5.0}, RegionKind::kTrailing}};
  for (double dt : {0.0, 0.5, 3.0}) {
    TrimResult t = trim_silence(a, r, {dt, 0.0, true});
    ASSERT_EQ(t.removed.size(), 2u);
    EXPECT_EQ(t.removed[0], (TimeInterval{0.0, 1.0}));
    EXPECT_EQ(t.removed[1], (TimeInterval{4.2, 5.0}));
  }
  TrimResult kept = trim_silence(a, r, {0.5, 0.0, false});
  ASSERT_EQ(kept.removed.size(), 2u);
  EXPECT_NEAR(kept.removed[0].start, 0.25, kSample);
  EXPECT_NEAR(kept.removed[0].end, 0.75, kSample);
}

TEST(TrimPolicy, ShortAndTinyRegionsKept) {
  AudioBuffer a = ramp(3.0);
  std::vector<SilenceRegion> r = {{{1.0, 1.5}, RegionKind::kInternal},
                                  {{2.0, 2.3}, RegionKind::kInternal}};
  EXPECT_TRUE(trim_silence(a, r, {0.4, 0.0, true}).removed.size() == 1u);
  EXPECT_TRUE(trim_silence(a, r, {0.0, 0.4, true}).removed.size() == 1u);
  EXPECT_TRUE(trim_silence(a, r, {0.6, 0.0, true}).removed.empty());
}

TEST(TrimPolicy, RejectsBadInput) {
  AudioBuffer a = ramp(1.0);
  std::vector<SilenceRegion> r = {{{0.5, 1.5}, RegionKind::kInternal}};
  EXPECT_THROW(trim_silence(a, r, {}), BoundsError);
  EXPECT_THROW((TrimPolicy{-1.0, 0.0, true}.validate()), ValidationError);
}

TEST(ThresholdDetector, AllZeroIsOneLeadingRegion) {
  AudioBuffer a = testing::constant(0.0f, 2.0, kRate);
  auto r = detect_threshold_silence(a);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].kind, RegionKind::kLeading);
  EXPECT_DOUBLE_EQ(r[0].interval.start, 0.0);
  EXPECT_DOUBLE_EQ(r[0].interval.end, 2.0);
}

TEST(ThresholdDetector, FullScaleSineHasNoSilence) {
  EXPECT_TRUE(detect_threshold_silence(testing::sine(440.0, 1.0, 2.0, kRate)).empty());
}

TEST(ThresholdDetector, QuietStretchBetweenLoudSegments) {
  // amplitude 0.005 has RMS 0.005/sqrt(2), about -49 dBFS
  AudioBuffer a = testing::sine(300.0, 0.5, 1.0, kRate);
  testing::append(a, testing::sine(300.0, 0.005, 0.5, kRate));
  testing::append(a, testing::sine(300.0, 0.5, 1.0, kRate));
  auto r = detect_threshold_silence(a);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].kind, RegionKind::kInternal);
  EXPECT_NEAR(r[0].interval.start, 1.0, 0.0101);
  EXPECT_NEAR(r[0].interval.end, 1.5, 0.0101);
}

TEST(ThresholdDetector, MinDurationAndClassification) {
  AudioBuffer a = testing::constant(0.0f, 0.3, kRate);
  testing::append(a, testing::sine(300.0, 0.5, 1.0, kRate));
  testing::append(a, testing::constant(0.0f, 0.2, kRate));
  testing::append(a, testing::sine(300.0, 0.5, 1.0, kRate));
  testing::append(a, testing::constant(0.0f, 0.4, kRate));
  auto r = detect_threshold_silence(a);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].kind, RegionKind::kLeading);
  EXPECT_EQ(r[1].kind, RegionKind::kTrailing);
  ThresholdParams shorter;
  shorter.min_duration = 0.15;
  auto r2 = detect_threshold_silence(a, shorter);
  ASSERT_EQ(r2.size(), 3u);
  EXPECT_EQ(r2[1].kind, RegionKind::kInternal);
  EXPECT_NEAR(r2[1].interval.start, 1.3, 1e-9);
  EXPECT_NEAR(r2[1].interval.end, 1.5, 1e-9);
}

Alignment labeled(size_t frames, std::initializer_list<std::pair<size_t, size_t>> silent) {
  Alignment a;
  a.frames.assign(frames, {"AH", 0});
  for (auto [b, e] : silent)
    for (size_t t = b; t <= e; ++t) a.frames[t] = {"sil", 0};
  return a;
}

TEST(AlignmentRegions, TimesFromFrames) {
  EXPECT_TRUE(silence_regions_from_alignment(labeled(50, {})).empty());
  auto lead = silence_regions_from_alignment(labeled(50, {{0, 9}}));
  ASSERT_EQ(lead.size(), 1u);
  EXPECT_EQ(lead[0].kind, RegionKind::kLeading);
  EXPECT_NEAR(lead[0].interval.start, 0.0, 1e-12);
  EXPECT_NEAR(lead[0].interval.end, 0.1, 1e-12);
  auto mid = silence_regions_from_alignment(labeled(600, {{200, 399}}));
  ASSERT_EQ(mid.size(), 1u);
  EXPECT_EQ(mid[0].kind, RegionKind::kInternal);
  EXPECT_NEAR(mid[0].interval.start, 2.0, 1e-12);
  EXPECT_NEAR(mid[0].interval.end, 4.0, 1e-12);
}

TEST(AlignmentRegions, TrailingRunReachesAudioEnd) {
  auto r = silence_regions_from_alignment(labeled(100, {{90, 99}}), 1.0149);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].kind, RegionKind::kTrailing);
  EXPECT_NEAR(r[0].interval.end, 1.0149, 1e-12);
}

// Random regions over random audio for the property tests.
struct Case {
  AudioBuffer audio;
  std::vector<SilenceRegion> regions;
  TrimPolicy policy;
};

Case random_case(Gen &g) {
  Case c;
  c.audio = ramp(g.uniform(1.0, 8.0));
  double dur = c.audio.duration_seconds(), t = g.uniform(0.0, 0.5);
  while (t < dur) {
    double len = g.uniform(0.05, 2.0);
    if (t + len > dur) break;
    c.regions.push_back({{t, t + len}, RegionKind::kInternal});
    t += len + g.uniform(0.05, 1.0);
  }
  if (!c.regions.empty() && c.regions.front().interval.start == 0.0)
    c.regions.front().kind = RegionKind::kLeading;
  c.policy.delta_t = g.coin() ? 0.0 : g.uniform(0.0, 1.5);
  c.policy.remove_boundary_silence = g.coin();
  return c;
}

TEST(TrimProperty, NothingOutsideRegionsAndExactAccounting) {
  Gen g(77);
  for (int trial = 0; trial < 300; ++trial) {
    Case c = random_case(g);
    TrimResult r = trim_silence(c.audio, c.regions, c.policy);
    auto ranges = intervals_to_ranges(r.removed, c.audio);
    size_t removed = 0;
    for (const auto &s : ranges) {
      removed += s.length();
      bool inside = false;
      for (const auto &reg : c.regions) {
        size_t b = seconds_to_sample(reg.interval.start, kRate);
        size_t e = seconds_to_sample(reg.interval.end, kRate);
        inside |= s.begin >= b && s.end <= e;
      }
      EXPECT_TRUE(inside) << "trial " << trial;
    }
    EXPECT_EQ(r.audio.size(), c.audio.size() - removed) << "trial " << trial;
  }
}

TEST(TrimProperty, MarginIsHalfDelta) {
  Gen g(78);
  for (int trial = 0; trial < 300; ++trial) {
    Case c = random_case(g);
    for (auto &reg : c.regions) reg.kind = RegionKind::kInternal;
    TrimResult r = trim_silence(c.audio, c.regions, c.policy);
    size_t k = 0;
    for (const auto &reg : c.regions) {
      if (!(reg.interval.length() > c.policy.delta_t)) continue;
      ASSERT_LT(k, r.removed.size());
      const auto &iv = r.removed[k++];
      size_t margin = seconds_to_sample(c.policy.delta_t / 2, kRate);
      long lead = static_cast<long>(seconds_to_sample(iv.start, kRate)) -
                  static_cast<long>(seconds_to_sample(reg.interval.start, kRate));
      long tail = static_cast<long>(seconds_to_sample(reg.interval.end, kRate)) -
                  static_cast<long>(seconds_to_sample(iv.end, kRate));
      EXPECT_LE(std::abs(lead - static_cast<long>(margin)), 1) << "trial " << trial;
      EXPECT_LE(std::abs(tail - static_cast<long>(margin)), 1) << "trial " << trial;
    }
    EXPECT_EQ(k, r.removed.size());
  }
}

CorpusManifest write_corpus(const std::filesystem::path &dir, const std::vector<AudioBuffer> &audio) {
  std::filesystem::create_directories(dir / "audio");
  CorpusManifest m;
  for (size_t i = 0; i < audio.size(); ++i) {
    std::string id = "u" + std::to_string(i);
    write_wav(dir / "audio" / (id + ".wav"), audio[i]);
    m.entries.push_back({id, "audio/" + id + ".wav", "a b", {}, {}});
  }
  write_manifest(dir / "manifest.jsonl", m);
  return load_manifest(dir / "manifest.jsonl");
}

TEST(Preprocess, NoSilenceLeavesAudioIdentical) {
  TempDir tmp("silence");
  auto m = write_corpus(tmp.path() / "in", {testing::sine(500, 0.5, 1.0, kRate),
                                            testing::sine(700, 0.5, 1.5, kRate)});
  PreprocessOptions opt;
  opt.method = SilenceMethod::kThreshold;
  opt.out_dir = tmp.path() / "out";
  PreprocessReport rep = preprocess_corpus(m, opt);
  EXPECT_EQ(rep.removed_seconds, 0.0);
  for (const auto &e : m.entries) {
    AudioBuffer in = load_wav(m.audio_path(e));
    AudioBuffer out = load_wav(opt.out_dir / "audio" / (e.id + ".wav"));
    EXPECT_EQ(in.samples, out.samples);
  }
  EXPECT_TRUE(std::filesystem::exists(opt.out_dir / "report.json"));
}

TEST(Preprocess, KnownRemovalTotals) {
  // six 60 s utterances, each with 5 s of internal silence: 360 s in, 30 s out
  std::vector<AudioBuffer> audio;
  for (int u = 0; u < 6; ++u) {
    AudioBuffer a = testing::sine(400 + 50 * u, 0.4, 20.0, kRate);
    testing::append(a, testing::constant(0.0f, 2.0, kRate));
    testing::append(a, testing::sine(400, 0.4, 18.0, kRate));
    testing::append(a, testing::constant(0.0f, 3.0, kRate));
    testing::append(a, testing::sine(600, 0.4, 17.0, kRate));
    audio.push_back(std::move(a));
  }
  TempDir tmp("silence");
  auto m = write_corpus(tmp.path() / "in", audio);
  PreprocessOptions opt;
  opt.method = SilenceMethod::kThreshold;
  opt.policy.delta_t = 0.0;
  opt.out_dir = tmp.path() / "out";
  PreprocessReport rep = preprocess_corpus(m, opt);
  EXPECT_NEAR(rep.input_seconds, 360.0, 1e-9);
  EXPECT_NEAR(rep.removed_seconds, 30.0, 1e-9);
  EXPECT_NEAR(rep.output_seconds, 330.0, 1e-9);
  ASSERT_EQ(rep.utterances.size(), 6u);
  for (const auto &u : rep.utterances) {
    double removed = 0;
    for (const auto &iv : u.removed) removed += iv.length();
    EXPECT_NEAR(u.output_seconds, u.input_seconds - removed, 1e-9);
    AudioBuffer out = load_wav(opt.out_dir / "audio" / (u.id + ".wav"));
    EXPECT_NEAR(out.duration_seconds(), u.output_seconds, 1e-9);
  }
  CorpusManifest written = load_manifest(opt.out_dir / "manifest.jsonl");
  EXPECT_EQ(written.entries.size(), 6u);
}

TEST(Preprocess, AllSilenceKeptWithWarning) {
  TempDir tmp("silence");
  auto m = write_corpus(tmp.path() / "in", {testing::constant(0.0f, 1.0, kRate)});
  PreprocessOptions opt;
  opt.method = SilenceMethod::kThreshold;
  opt.out_dir = tmp.path() / "out";
  PreprocessReport rep = preprocess_corpus(m, opt);
  ASSERT_EQ(rep.utterances.size(), 1u);
  EXPECT_EQ(rep.utterances[0].status, "all_silence");
  CorpusManifest written = load_manifest(opt.out_dir / "manifest.jsonl");
  ASSERT_EQ(written.entries.size(), 1u);
  EXPECT_TRUE(written.entries[0].warning.has_value());
  EXPECT_EQ(load_wav(opt.out_dir / "audio" / "u0.wav").size(), 0u);
}

TEST(Preprocess, AlignmentMethodNeedsModel) {
  TempDir tmp("silence");
  auto m = write_corpus(tmp.path() / "in", {testing::sine(500, 0.5, 1.0, kRate)});
  PreprocessOptions opt;
  opt.out_dir = tmp.path() / "out";
  EXPECT_THROW(preprocess_corpus(m, opt), ValidationError);
}

class AlignmentTrim : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("align_trim");
    FixtureSpec spec;
    spec.num_utterances = 4;
    corpus_ = new FixtureCorpus(make_fixture_corpus(spec));
    write_fixture_corpus(dir_->path() / "corpus", *corpus_);
    std::vector<TrainUtterance> train_set;
    for (const auto &u : corpus_->utterances)
      train_set.push_back({u.id, compute_mfcc(u.audio, {}), split_words(u.text)});
    TrainSchedule sched;
    sched.align_iters = 20;
    sched.split_iters = 3;
    model_ = new GmmHmmModel(
        train(train_set, corpus_->lexicon, PhoneSet::from_lexicon(corpus_->lexicon, "sil"), sched)
            .model);
  }
  static void TearDownTestSuite() {
    delete model_;
    delete corpus_;
    delete dir_;
  }
  static PreprocessOptions options(const std::filesystem::path &out) {
    PreprocessOptions opt;
    opt.policy.delta_t = 0.0;
    opt.model = model_;
    opt.lexicon = &corpus_->lexicon;
    opt.out_dir = out;
    return opt;
  }

  static TempDir *dir_;
  static FixtureCorpus *corpus_;
  static GmmHmmModel *model_;
};

TempDir *AlignmentTrim::dir_ = nullptr;
FixtureCorpus *AlignmentTrim::corpus_ = nullptr;
GmmHmmModel *AlignmentTrim::model_ = nullptr;

TEST_F(AlignmentTrim, RemovedIntervalsLieInAlignedSilence) {
  auto m = load_manifest(dir_->path() / "corpus" / "manifest.jsonl");
  auto out = dir_->path() / "trim1";
  PreprocessReport rep = preprocess_corpus(m, options(out));
  EXPECT_EQ(rep.failed, 0u);
  for (const auto &u : rep.utterances) {
    std::ifstream is(out / "alignments" / (u.id + ".ctm"));
    Alignment ali = read_alignment(is);
    auto regions = silence_regions_from_alignment(ali, u.input_seconds);
    for (const auto &iv : u.removed) {
      bool inside = false;
      for (const auto &r : regions)
        inside |= iv.start >= r.interval.start - 1e-9 && iv.end <= r.interval.end + 1e-9;
      EXPECT_TRUE(inside) << u.id << " (" << iv.start << ", " << iv.end << ")";
    }
  }
  // every constructed long pause is mostly gone
  for (size_t i = 0; i < corpus_->utterances.size(); ++i) {
    const auto &fx = corpus_->utterances[i];
    for (const auto &p : fx.long_pauses) {
      double covered = 0;
      for (const auto &iv : rep.utterances[i].removed)
        covered += std::max(0.0, std::min(iv.end, p.end) - std::max(iv.start, p.start));
      EXPECT_GT(covered, p.length() - 0.2) << fx.id;
    }
  }
}

TEST_F(AlignmentTrim, RetrimmingRemovesAlmostNothing) {
  auto m = load_manifest(dir_->path() / "corpus" / "manifest.jsonl");
  auto once = dir_->path() / "once";
  preprocess_corpus(m, options(once));
  auto again = preprocess_corpus(load_manifest(once / "manifest.jsonl"),
                                 options(dir_->path() / "twice"));
  for (const auto &u : again.utterances) {
    double removed = 0;
    for (const auto &iv : u.removed) removed += iv.length();
    EXPECT_LT(removed, 0.1) << u.id;
  }
}

}  // namespace
}  // namespace sdtk
