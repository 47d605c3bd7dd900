// core/src/silence.cpp

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

#include "sdtk/silence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sdtk/alignment_io.hpp"
#include "sdtk/error.hpp"
#include "sdtk/parallel.hpp"

namespace sdtk {

namespace {

RegionKind classify(size_t begin, size_t end, size_t total) {
  if (begin == 0) return RegionKind::kLeading;
  if (end >= total) return RegionKind::kTrailing;
  return RegionKind::kInternal;
}

}  // namespace

const char *to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::kLeading: return "leading";
    case RegionKind::kTrailing: return "trailing";
    default: return "internal";
  }
}

void TrimPolicy::validate() const {
  if (!(delta_t >= 0.0)) throw ValidationError("trim.delta_t must be >= 0");
  if (!(min_region >= 0.0)) throw ValidationError("trim.min_region must be >= 0");
}

void ThresholdParams::validate() const {
  if (!std::isfinite(threshold_db)) throw ValidationError("trim.threshold_db must be finite");
  if (!(min_duration >= 0.0)) throw ValidationError("trim.min_duration must be >= 0");
  if (!(frame_length > 0.0)) throw ValidationError("trim.frame_length must be positive");
}

std::vector<SilenceRegion> detect_threshold_silence(const AudioBuffer &audio,
                                                    const ThresholdParams &params) {
  params.validate();
  std::vector<SilenceRegion> regions;
  const size_t len = audio.size();
  if (len == 0) return regions;
  const size_t frame =
      std::max<size_t>(1, static_cast<size_t>(std::lround(params.frame_length * audio.sample_rate)));
  const size_t nframes = (len + frame - 1) / frame;
  std::vector<bool> quiet(nframes);
  for (size_t i = 0; i < nframes; ++i) {
    size_t b = i * frame, e = std::min(len, b + frame);
    double acc = 0.0;
    for (size_t n = b; n < e; ++n) acc += double(audio.samples[n]) * audio.samples[n];
    double rms = std::sqrt(acc / static_cast<double>(e - b));
    double db = 20.0 * std::log10(std::max(rms, 1e-12));
    quiet[i] = db < params.threshold_db;
  }
  size_t i = 0;
  while (i < nframes) {
    if (!quiet[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < nframes && quiet[j]) ++j;
    size_t b = i * frame, e = std::min(len, j * frame);
    double dur = static_cast<double>(e - b) / audio.sample_rate;
    if (dur + 1e-9 >= params.min_duration) {
      regions.push_back({{static_cast<double>(b) / audio.sample_rate,
                          static_cast<double>(e) / audio.sample_rate},
                         classify(b, e, len)});
    }
    i = j;
  }
  return regions;
}

std::vector<SilenceRegion> silence_regions_from_alignment(const Alignment &ali,
                                                          std::optional<double> audio_duration) {
  std::vector<SilenceRegion> regions;
  const size_t T = ali.num_frames();
  size_t t = 0;
  while (t < T) {
    if (!ali.is_silence(t)) {
      ++t;
      continue;
    }
    size_t end = t;
    while (end < T && ali.is_silence(end)) ++end;
    SilenceRegion r{{t * ali.frame_shift, end * ali.frame_shift}, classify(t, end, T)};
    if (end == T && audio_duration && *audio_duration > r.interval.end)
      r.interval.end = *audio_duration;
    regions.push_back(r);
    t = end;
  }
  return regions;
}

TrimResult trim_silence(const AudioBuffer &audio, std::span<const SilenceRegion> regions,
                        const TrimPolicy &policy) {
  policy.validate();
  const double duration = audio.duration_seconds();
  const double slack = 0.5 / audio.sample_rate;
  std::vector<SilenceRegion> sorted(regions.begin(), regions.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto &a, const auto &b) { return a.interval.start < b.interval.start; });
  double prev_end = 0.0;
  for (const auto &r : sorted) {
    const auto &iv = r.interval;
    if (!(iv.start >= 0.0) || !(iv.end > iv.start) || iv.end > duration + slack)
      throw BoundsError(fmt::format("silence region ({}, {}) outside audio of {} s", iv.start,
                                    iv.end, duration));
    if (iv.start < prev_end) throw BoundsError("silence regions overlap");
    prev_end = iv.end;
  }

  const double margin = policy.delta_t / 2.0;
  TrimResult out;
  for (const auto &r : sorted) {
    TimeInterval iv{r.interval.start, std::min(r.interval.end, duration)};
    bool boundary = r.kind != RegionKind::kInternal;
    if (boundary && policy.remove_boundary_silence) {
      out.removed.push_back(iv);
      continue;
    }
    double len = iv.length();
    if (len <= policy.delta_t || len < policy.min_region) continue;
    out.removed.push_back({iv.start + margin, iv.end - margin});
  }
  // Drop intervals that vanish at sample resolution.
  std::erase_if(out.removed, [&](const TimeInterval &iv) {
    return seconds_to_sample(iv.start, audio.sample_rate) >=
           seconds_to_sample(iv.end, audio.sample_rate);
  });
  out.audio = cut_intervals(audio, out.removed);
  return out;
}

SilenceMethod parse_silence_method(const std::string &name) {
  if (name == "threshold") return SilenceMethod::kThreshold;
  if (name == "alignment") return SilenceMethod::kAlignment;
  throw ValidationError("unknown silence method '" + name + "' (expected threshold|alignment)");
}

const char *to_string(SilenceMethod method) {
  return method == SilenceMethod::kThreshold ? "threshold" : "alignment";
}

bool PreprocessReport::failure_rate_exceeded() const {
  return !utterances.empty() && static_cast<double>(failed) > 0.01 * utterances.size();
}

PreprocessReport preprocess_corpus(const CorpusManifest &manifest,
                                   const PreprocessOptions &options) {
  options.policy.validate();
  options.threshold.validate();
  bool by_alignment = options.method == SilenceMethod::kAlignment;
  if (by_alignment && (!options.model || !options.lexicon))
    throw ValidationError("alignment-based trimming needs a trained model and a lexicon");
  if (options.out_dir.empty()) throw ValidationError("no output directory given");

  const size_t n = manifest.entries.size();
  struct Work {
    UtteranceTrimReport report;
    AudioBuffer audio;
    int sample_rate = 0;
    std::optional<Alignment> alignment;
  };
  std::vector<Work> work(n);

  parallel_for(n, options.jobs, [&](size_t i) {
    const auto &e = manifest.entries[i];
    auto &w = work[i];
    w.report.id = e.id;
    try {
      AudioBuffer audio = load_wav(manifest.audio_path(e));
      w.sample_rate = audio.sample_rate;
      w.report.input_seconds = audio.duration_seconds();
      std::vector<SilenceRegion> regions;
      if (by_alignment) {
        FeatureMatrix feats = compute_mfcc(audio, options.features);
        auto words = split_words(e.text);
        StateGraph graph = build_state_graph(words, *options.lexicon, options.model->phones(),
                                             options.model->config());
        Alignment ali = viterbi_align(feats, *options.model, graph);
        ali.utterance_id = e.id;
        ali.audio_duration = audio.duration_seconds();
        regions = silence_regions_from_alignment(ali, audio.duration_seconds());
        w.alignment = std::move(ali);
      } else {
        regions = detect_threshold_silence(audio, options.threshold);
      }
      TrimResult trimmed = trim_silence(audio, regions, options.policy);
      w.report.removed = std::move(trimmed.removed);
      w.report.output_seconds = trimmed.audio.duration_seconds();
      w.report.status = trimmed.audio.empty() ? "all_silence" : "ok";
      w.audio = std::move(trimmed.audio);
    } catch (const std::exception &ex) {
      w.report.status = "failed";
      w.report.error = ex.what();
    }
  });

  int rate = 0;
  for (const auto &w : work) {
    if (w.report.status == "failed") continue;
    if (rate == 0) rate = w.sample_rate;
    if (w.sample_rate != rate)
      throw ValidationError(fmt::format("utterance '{}' has sample rate {}, corpus uses {}",
                                        w.report.id, w.sample_rate, rate));
  }

  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir / "audio");
  if (by_alignment) fs::create_directories(options.out_dir / "alignments");

  PreprocessReport report;
  report.method = to_string(options.method);
  report.delta_t = options.policy.delta_t;
  CorpusManifest out_manifest;
  out_manifest.base_dir = options.out_dir;
  for (size_t i = 0; i < n; ++i) {
    auto &w = work[i];
    const auto &e = manifest.entries[i];
    if (w.report.status == "failed") {
      spdlog::warn("trimming '{}' failed: {}", e.id, w.report.error);
      ++report.failed;
    } else {
      std::string rel = "audio/" + e.id + ".wav";
      write_wav(options.out_dir / rel, w.audio);
      ManifestEntry out = e;
      out.audio = rel;
      if (w.report.status == "all_silence") {
        out.warning = "all-silence";
        spdlog::warn("utterance '{}' is entirely silence", e.id);
      }
      out_manifest.entries.push_back(std::move(out));
      if (w.alignment) {
        std::ofstream os(options.out_dir / "alignments" / (e.id + ".ctm"));
        write_alignment(os, *w.alignment);
      }
      report.input_seconds += w.report.input_seconds;
      report.output_seconds += w.report.output_seconds;
    }
    report.utterances.push_back(std::move(w.report));
  }
  report.removed_seconds = report.input_seconds - report.output_seconds;
  if (report.failed > 0) spdlog::warn("{} of {} utterances failed", report.failed, n);

  write_manifest(options.out_dir / "manifest.jsonl", out_manifest);
  write_preprocess_report(options.out_dir / "report.json", report);
  return report;
}

void write_preprocess_report(const std::filesystem::path &path, const PreprocessReport &report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["method"] = report.method;
  j["delta_t"] = report.delta_t;
  j["totals"] = {{"utterances", report.utterances.size()},
                 {"failed", report.failed},
                 {"input_seconds", report.input_seconds},
                 {"output_seconds", report.output_seconds},
                 {"removed_seconds", report.removed_seconds}};
  ordered_json utts = ordered_json::array();
  for (const auto &u : report.utterances) {
    ordered_json r;
    r["id"] = u.id;
    r["status"] = u.status;
    if (!u.error.empty()) r["error"] = u.error;
    r["input_seconds"] = u.input_seconds;
    r["output_seconds"] = u.output_seconds;
    ordered_json removed = ordered_json::array();
    for (const auto &iv : u.removed) removed.push_back({iv.start, iv.end});
    r["removed"] = std::move(removed);
    utts.push_back(std::move(r));
  }
  j["utterances"] = std::move(utts);
  std::ofstream os(path);
  if (!os) throw IoError("cannot create " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace sdtk
