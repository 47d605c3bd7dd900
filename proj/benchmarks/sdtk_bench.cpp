// benchmarks/sdtk_bench.cpp

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

#include <benchmark/benchmark.h>

#include <random>

#include "sdtk/decoder.hpp"
#include "sdtk/features.hpp"
#include "sdtk/fixture.hpp"
#include "sdtk/gmm_hmm.hpp"
#include "sdtk/metrics.hpp"

namespace sdtk {
namespace {

const FixtureCorpus &corpus() {
  static const FixtureCorpus fx = [] {
    FixtureSpec spec;
    spec.num_utterances = 2;
    return make_fixture_corpus(spec);
  }();
  return fx;
}

void BM_Mfcc(benchmark::State &state) {
  const AudioBuffer &audio = corpus().utterances[0].audio;
  FeatureConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(compute_mfcc(audio, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(audio.size()));
}
BENCHMARK(BM_Mfcc)->Unit(benchmark::kMillisecond);

void BM_ViterbiAlign(benchmark::State &state) {
  const auto &fx = corpus();
  const auto &utt = fx.utterances[0];
  FeatureMatrix feats = compute_mfcc(utt.audio, {});
  PhoneSet phones = PhoneSet::from_lexicon(fx.lexicon, "sil");
  std::vector<TrainUtterance> data = {{utt.id, feats, split_words(utt.text)}};
  TrainSchedule sched;
  sched.align_iters = 5;
  sched.split_iters = static_cast<int>(state.range(0));
  GmmHmmModel model = train(data, fx.lexicon, phones, sched).model;
  StateGraph graph = build_state_graph(data[0].words, fx.lexicon, phones, model.config());
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_align(feats, model, graph));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(feats.frames));
}
BENCHMARK(BM_ViterbiAlign)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_CtcPrefixBeam(benchmark::State &state) {
  LabelInventory inv = LabelInventory::cmudict();
  Lexicon lex;
  lex.add("cat", {"K", "AE1", "T#"});
  lex.add("cap", {"K", "AE1", "P#"});
  lex.add("sat", {"S", "AE1", "T#"});
  lex.add("at", {"AE1", "T#"});
  lex.add("a", {"AH0#"});
  // Noisy stream that peaks on "cat sat at a" repeated, blanks between labels.
  std::vector<std::string> script = {"K", "AE1", "T#", "S", "AE1", "T#", "AE1", "T#", "AH0#"};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  PosteriorStream p{216, inv.size(), {}};
  for (size_t t = 0; t < p.frames; ++t) {
    std::vector<double> row(inv.size());
    for (auto &v : row) v = 0.02 * u(rng);
    size_t peak = t % 3 == 2 ? *inv.blank_index()
                             : static_cast<size_t>(inv.index(script[(t / 3) % script.size()]));
    row[peak] += 1.0;
    double sum = 0;
    for (double v : row) sum += v;
    for (auto &v : row) p.probs.push_back(v / sum);
  }
  FusionWeights w;
  w.beam_size = static_cast<size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ctc_prefix_beam(p, inv, &lex, nullptr, w));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(p.frames));
}
BENCHMARK(BM_CtcPrefixBeam)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Levenshtein(benchmark::State &state) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> word(0, 40);
  std::vector<std::string> ref(static_cast<size_t>(state.range(0))), hyp;
  for (auto &w : ref) w = "w" + std::to_string(word(rng));
  for (const auto &w : ref)
    if (word(rng) > 3) hyp.push_back(word(rng) > 4 ? w : "x");
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein_align(ref, hyp));
}
BENCHMARK(BM_Levenshtein)->Arg(20)->Arg(200);

}  // namespace
}  // namespace sdtk

BENCHMARK_MAIN();
