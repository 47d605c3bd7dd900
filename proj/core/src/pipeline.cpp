// core/src/pipeline.cpp

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

#include "sdtk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sdtk/alignment_io.hpp"
#include "sdtk/audio_io.hpp"
#include "sdtk/error.hpp"
#include "sdtk/gmm_hmm.hpp"
#include "sdtk/lexicon.hpp"
#include "sdtk/parallel.hpp"
#include "sdtk/silence.hpp"

namespace sdtk {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json ratio_json(const RatioMetric &m) {
  return {{"value", m.value}, {"numerator", m.numerator}, {"denominator", m.denominator}};
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
}

void fresh_dir(const fs::path &dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

class StageTimer {
 public:
  explicit StageTimer(RunReport &report, Stage stage) : report_(report) {
    entry_.name = to_string(stage);
    spdlog::info("stage {}", entry_.name);
    start_ = std::chrono::steady_clock::now();
  }
  StageReport &entry() { return entry_; }
  ~StageTimer() {
    entry_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    report_.stages.push_back(entry_);
  }

 private:
  RunReport &report_;
  StageReport entry_;
  std::chrono::steady_clock::time_point start_;
};

struct Context {
  const PipelineConfig &cfg;
  fs::path run;
  CorpusManifest manifest;
  Lexicon lexicon;

  fs::path features_dir() const { return run / "features"; }
  fs::path feature_file(const std::string &id) const { return features_dir() / (id + ".spfm"); }
  fs::path model_file() const { return run / "model.gmm"; }
  fs::path trimmed_dir() const { return run / "trimmed"; }

  void require_features() const {
    if (!fs::is_directory(features_dir()))
      throw MissingArtifactError(
          fmt::format("no features under {}; run features first", features_dir().string()));
  }
  GmmHmmModel require_model() const {
    if (!fs::exists(model_file()))
      throw MissingArtifactError(
          fmt::format("no trained model at {}; run train-gmm first", model_file().string()));
    return read_model(model_file());
  }
};

void stage_features(Context &ctx, StageReport &rep) {
  fresh_dir(ctx.features_dir());
  const auto &entries = ctx.manifest.entries;
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), ctx.cfg.jobs, [&](size_t i) {
    try {
      AudioBuffer audio = load_wav(ctx.manifest.audio_path(entries[i]));
      write_feature_matrix(ctx.feature_file(entries[i].id), compute_mfcc(audio, ctx.cfg.features));
    } catch (const std::exception &e) {
      errors[i] = e.what();
    }
  });
  for (size_t i = 0; i < entries.size(); ++i) {
    if (errors[i].empty()) {
      ++rep.processed;
    } else {
      ++rep.skipped;
      spdlog::warn("features for '{}' skipped: {}", entries[i].id, errors[i]);
    }
  }
}

void stage_train(Context &ctx, StageReport &rep) {
  ctx.require_features();
  std::vector<TrainUtterance> corpus;
  for (const auto &e : ctx.manifest.entries) {
    auto file = ctx.feature_file(e.id);
    if (!fs::exists(file)) {
      ++rep.skipped;
      continue;
    }
    corpus.push_back(TrainUtterance{e.id, read_feature_matrix(file), split_words(e.text)});
  }
  if (corpus.empty()) throw ValidationError("no utterances with features to train on");
  PhoneSet phones = PhoneSet::from_lexicon(ctx.lexicon, ctx.cfg.silence_phone);
  TrainResult result = train(corpus, ctx.lexicon, phones, ctx.cfg.train, ctx.cfg.jobs);
  write_model(ctx.model_file(), result.model);
  rep.skipped += result.skipped.size();
  rep.processed = corpus.size() - result.skipped.size();
  json scores = {{"align_scores", result.align_scores},
                 {"split_scores", result.split_scores},
                 {"skipped", result.skipped}};
  write_text(ctx.run / "train_scores.json", scores.dump(2) + "\n");
}

// Aligns every entry of `manifest` against `model`; nullopt for failures.
std::vector<std::optional<Alignment>> align_corpus(const Context &ctx,
                                                   const CorpusManifest &manifest,
                                                   const GmmHmmModel &model,
                                                   bool from_feature_files) {
  const auto &entries = manifest.entries;
  std::vector<std::optional<Alignment>> out(entries.size());
  parallel_for(entries.size(), ctx.cfg.jobs, [&](size_t i) {
    const auto &e = entries[i];
    try {
      AudioBuffer audio = load_wav(manifest.audio_path(e));
      if (audio.empty()) return;
      FeatureMatrix feats = from_feature_files ? read_feature_matrix(ctx.feature_file(e.id))
                                               : compute_mfcc(audio, ctx.cfg.features);
      auto words = split_words(e.text);
      StateGraph graph = build_state_graph(words, ctx.lexicon, model.phones(), model.config());
      Alignment ali = viterbi_align(feats, model, graph);
      ali.utterance_id = e.id;
      ali.frame_shift = ctx.cfg.features.frame_shift;
      ali.audio_duration = audio.duration_seconds();
      out[i] = std::move(ali);
    } catch (const std::exception &ex) {
      spdlog::warn("alignment of '{}' failed: {}", e.id, ex.what());
    }
  });
  return out;
}

std::vector<Alignment> collect(std::vector<std::optional<Alignment>> &alis, StageReport &rep) {
  std::vector<Alignment> ok;
  for (auto &a : alis) {
    if (a) {
      ok.push_back(std::move(*a));
      ++rep.processed;
    } else {
      ++rep.skipped;
    }
  }
  return ok;
}

void stage_align(Context &ctx, StageReport &rep) {
  GmmHmmModel model = ctx.require_model();
  ctx.require_features();
  auto alis = align_corpus(ctx, ctx.manifest, model, true);
  auto ok = collect(alis, rep);
  fresh_dir(ctx.run / "alignments");
  write_alignment_dir(ctx.run / "alignments", ok);
}

void stage_trim(Context &ctx, StageReport &rep, RunReport &report) {
  std::optional<GmmHmmModel> model;
  if (ctx.cfg.trim.method == SilenceMethod::kAlignment) model = ctx.require_model();
  fs::remove_all(ctx.trimmed_dir());
  PreprocessOptions opts;
  opts.method = ctx.cfg.trim.method;
  opts.threshold = ctx.cfg.trim.threshold;
  opts.policy = ctx.cfg.trim.policy;
  opts.features = ctx.cfg.features;
  opts.model = model ? &*model : nullptr;
  opts.lexicon = &ctx.lexicon;
  opts.out_dir = ctx.trimmed_dir();
  opts.jobs = ctx.cfg.jobs;
  PreprocessReport pre = preprocess_corpus(ctx.manifest, opts);
  rep.processed = pre.utterances.size() - pre.failed;
  rep.skipped = pre.failed;
  report.trimmed_seconds = pre.removed_seconds;
  if (pre.failure_rate_exceeded())
    spdlog::error("{} of {} utterances failed silence trimming", pre.failed, pre.utterances.size());
}

std::map<std::string, std::string> read_hypotheses(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> hyps;
  size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      hyps[j.at("id").get<std::string>()] = j.at("text").get<std::string>();
    } catch (const json::exception &e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return hyps;
}

void stage_metrics(Context &ctx, StageReport &rep, RunReport &report) {
  GmmHmmModel model = ctx.require_model();
  fs::path trimmed_manifest = ctx.trimmed_dir() / "manifest.jsonl";
  if (!fs::exists(trimmed_manifest))
    throw MissingArtifactError(
        fmt::format("no trimmed corpus at {}; run trim-silence first", trimmed_manifest.string()));
  CorpusManifest trimmed = load_manifest(trimmed_manifest);

  auto alis = align_corpus(ctx, trimmed, model, false);
  std::vector<Alignment> ok;
  std::vector<double> durations;
  for (size_t i = 0; i < alis.size(); ++i) {
    if (alis[i]) {
      durations.push_back(alis[i]->audio_duration);
      ok.push_back(std::move(*alis[i]));
      ++rep.processed;
    } else {
      ++rep.skipped;
    }
  }
  fresh_dir(ctx.run / "metrics" / "alignments");
  write_alignment_dir(ctx.run / "metrics" / "alignments", ok);

  json out;
  out["udr_threshold"] = ctx.cfg.metrics.unaligned_threshold;
  if (!ok.empty()) {
    report.udr = compute_udr(ok, durations, ctx.cfg.metrics);
    out["udr"] = ratio_json(*report.udr);
  } else {
    out["udr"] = nullptr;
  }

  std::map<std::string, std::string> hyp_text;
  if (ctx.cfg.paths.hypotheses) {
    hyp_text = read_hypotheses(*ctx.cfg.paths.hypotheses);
    out["wdr_source"] = "hypotheses";
  } else {
    for (const auto &e : trimmed.entries) hyp_text[e.id] = e.text;
    out["wdr_source"] = "trimmed_manifest";
  }
  std::vector<WordPair> pairs;
  for (const auto &e : ctx.manifest.entries) {
    auto it = hyp_text.find(e.id);
    pairs.emplace_back(normalize_words(e.text),
                       it == hyp_text.end() ? std::vector<std::string>{}
                                            : normalize_words(it->second));
  }
  report.wdr = compute_wdr(pairs);
  out["wdr"] = ratio_json(*report.wdr);
  write_text(ctx.run / "metrics.json", out.dump(2) + "\n");
}

}  // namespace

const char *to_string(Stage stage) {
  switch (stage) {
    case Stage::kFeatures: return "features";
    case Stage::kTrain: return "train";
    case Stage::kAlign: return "align";
    case Stage::kTrim: return "trim";
    case Stage::kMetrics: return "metrics";
  }
  return "?";
}

Stage parse_stage(const std::string &name) {
  if (name == "features") return Stage::kFeatures;
  if (name == "train" || name == "train-gmm") return Stage::kTrain;
  if (name == "align") return Stage::kAlign;
  if (name == "trim" || name == "trim-silence") return Stage::kTrim;
  if (name == "metrics") return Stage::kMetrics;
  throw ValidationError("unknown pipeline stage '" + name + "'");
}

std::vector<Stage> all_stages() {
  return {Stage::kFeatures, Stage::kTrain, Stage::kAlign, Stage::kTrim, Stage::kMetrics};
}

RunReport run_pipeline(const PipelineConfig &cfg, std::span<const Stage> stages) {
  cfg.validate();
  std::vector<Stage> order(stages.begin(), stages.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  Context ctx{cfg, cfg.paths.run_dir, load_manifest(cfg.paths.manifest),
              load_lexicon(cfg.paths.lexicon)};
  fs::create_directories(ctx.run);
  RunReport report;
  report.config_hash = config_hash(cfg);
  std::string resolved = canonical_json(cfg);
  spdlog::info("resolved config (sha256 {}):\n{}", report.config_hash, resolved);
  write_text(ctx.run / "resolved_config.json", resolved + "\n");

  for (Stage s : order) {
    StageTimer timer(report, s);
    switch (s) {
      case Stage::kFeatures: stage_features(ctx, timer.entry()); break;
      case Stage::kTrain: stage_train(ctx, timer.entry()); break;
      case Stage::kAlign: stage_align(ctx, timer.entry()); break;
      case Stage::kTrim: stage_trim(ctx, timer.entry(), report); break;
      case Stage::kMetrics: stage_metrics(ctx, timer.entry(), report); break;
    }
  }
  const std::string exclude[] = {kRunReportFile};
  report.artifacts_hash = hash_directory(ctx.run, exclude);
  write_run_report(ctx.run / kRunReportFile, report);
  return report;
}

void write_run_report(const fs::path &path, const RunReport &report) {
  json j;
  j["config_hash"] = report.config_hash;
  j["artifacts_hash"] = report.artifacts_hash;
  j["stages"] = json::array();
  for (const auto &s : report.stages)
    j["stages"].push_back({{"name", s.name},
                           {"seconds", s.seconds},
                           {"processed", s.processed},
                           {"skipped", s.skipped}});
  j["udr"] = report.udr ? ratio_json(*report.udr) : json(nullptr);
  j["wdr"] = report.wdr ? ratio_json(*report.wdr) : json(nullptr);
  j["removed_seconds"] = report.trimmed_seconds ? json(*report.trimmed_seconds) : json(nullptr);
  write_text(path, j.dump(2) + "\n");
}

std::string hash_directory(const fs::path &dir, std::span<const std::string> exclude) {
  std::vector<fs::path> files;
  for (const auto &e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), dir);
    if (std::find(exclude.begin(), exclude.end(), rel.generic_string()) != exclude.end()) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  std::string buf;
  for (const auto &rel : files) {
    std::ifstream is(dir / rel, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    std::string body = ss.str();
    buf += rel.generic_string();
    buf += '\0';
    buf += std::to_string(body.size());
    buf += '\0';
    buf += body;
  }
  return sha256_hex(buf);
}

}  // namespace sdtk
