// tools/sdtk_main.cpp

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

// sdtk: command-line driver. Exit codes: 0 success, 1 invalid input or
// configuration, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sdtk/alignment_io.hpp"
#include "sdtk/audio_io.hpp"
#include "sdtk/config.hpp"
#include "sdtk/decoder.hpp"
#include "sdtk/error.hpp"
#include "sdtk/features.hpp"
#include "sdtk/fixture.hpp"
#include "sdtk/gmm_hmm.hpp"
#include "sdtk/metrics.hpp"
#include "sdtk/ngram_lm.hpp"
#include "sdtk/parallel.hpp"
#include "sdtk/pipeline.hpp"
#include "sdtk/scorers.hpp"
#include "sdtk/silence.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sdtk;

namespace {

void print_ratio(const char *metric, const RatioMetric &m) {
  json j = {{"metric", metric},
            {"value", m.value},
            {"numerator", m.numerator},
            {"denominator", m.denominator}};
  std::cout << j.dump() << "\n";
}

// JSON lines with at least {id, text}.
std::vector<std::pair<std::string, std::string>> read_transcripts(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      out.emplace_back(j.at("id").get<std::string>(), j.at("text").get<std::string>());
    } catch (const json::exception &e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

FeatureConfig feature_config(const std::string &config_path) {
  if (config_path.empty()) return {};
  // Only the features section matters here; the path checks are satisfied
  // with placeholders.
  std::ifstream is(config_path);
  if (!is) throw IoError("cannot open " + config_path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::vector<std::string> ov = {"paths.manifest=-", "paths.lexicon=-", "paths.run_dir=-"};
  return parse_config(ss.str(), fs::path(config_path).parent_path(), ov, config_path).features;
}

LabelInventory inventory_from(const std::string &path, const std::string &blank) {
  if (path.empty() || path == "cmudict") return LabelInventory::cmudict(blank);
  return load_inventory(path, blank.empty() ? std::nullopt : std::optional<std::string>(blank));
}

json hypotheses_json(const std::vector<Hypothesis> &hyps, const LabelInventory &inv,
                     size_t nbest) {
  json arr = json::array();
  for (size_t i = 0; i < hyps.size() && i < nbest; ++i) {
    const auto &h = hyps[i];
    json labels = json::array();
    for (int l : h.labels) labels.push_back(inv.label(static_cast<size_t>(l)));
    arr.push_back({{"labels", labels},
                   {"words", h.words},
                   {"score_total", h.score_total},
                   {"score_am", h.score_am},
                   {"score_lm", h.score_lm},
                   {"score_ilm", h.score_ilm},
                   {"complete", h.complete}});
  }
  return arr;
}

struct Common {
  int jobs = 1;
  std::string config;
  std::string log_level = "info";
};

}  // namespace

int main(int argc, char **argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("sdtk"));
  CLI::App app{"sdtk: speech data toolkit (alignment, silence trimming, metrics, decoding)"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--jobs", common.jobs, "Worker threads for per-utterance work")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", common.config, "YAML config file");
  app.add_option("--log-level", common.log_level, "trace|debug|info|warn|error|off");

  // features
  auto *feat = app.add_subcommand("features", "Compute MFCC feature files");
  std::string feat_manifest, feat_out;
  feat->add_option("--manifest", feat_manifest)->required();
  feat->add_option("--out-dir", feat_out)->required();

  // train-gmm
  auto *trn = app.add_subcommand("train-gmm", "Train a monophone GMM-HMM by Viterbi EM");
  std::string trn_manifest, trn_lexicon, trn_features, trn_out = "model.gmm", trn_sil = "sil";
  int align_iters = 75, split_iters = 10;
  trn->add_option("--manifest", trn_manifest)->required();
  trn->add_option("--lexicon", trn_lexicon)->required();
  trn->add_option("--features-dir", trn_features, "SPFM files; computed from audio if omitted");
  trn->add_option("--out", trn_out);
  trn->add_option("--align-iters", align_iters)->check(CLI::NonNegativeNumber);
  trn->add_option("--split-iters", split_iters)->check(CLI::NonNegativeNumber);
  trn->add_option("--silence-phone", trn_sil);

  // align
  auto *aln = app.add_subcommand("align", "Forced-align a corpus");
  std::string aln_manifest, aln_lexicon, aln_model, aln_out;
  aln->add_option("--manifest", aln_manifest)->required();
  aln->add_option("--lexicon", aln_lexicon)->required();
  aln->add_option("--model", aln_model)->required();
  aln->add_option("--out-dir", aln_out)->required();

  // trim-silence
  auto *trim = app.add_subcommand("trim-silence", "Remove silence from a corpus");
  std::string trim_method = "threshold", trim_manifest, trim_out, trim_model, trim_lexicon;
  TrimPolicy policy;
  ThresholdParams thr;
  bool keep_boundary = false;
  trim->add_option("--method", trim_method)->check(CLI::IsMember({"threshold", "alignment"}));
  trim->add_option("--delta-t", policy.delta_t);
  trim->add_option("--min-region", policy.min_region);
  trim->add_flag("--keep-boundary-silence", keep_boundary,
                 "Apply the delta-t margin to leading/trailing silence instead of removing it");
  trim->add_option("--threshold-db", thr.threshold_db);
  trim->add_option("--min-duration", thr.min_duration);
  trim->add_option("--manifest", trim_manifest)->required();
  trim->add_option("--out-dir", trim_out)->required();
  trim->add_option("--model", trim_model, "Required for --method alignment");
  trim->add_option("--lexicon", trim_lexicon, "Required for --method alignment");

  // udr
  auto *udr = app.add_subcommand("udr", "Unaligned duration ratio over alignment files");
  std::string udr_dir;
  UdrConfig udr_cfg;
  udr->add_option("--alignments", udr_dir)->required();
  udr->add_option("--threshold", udr_cfg.unaligned_threshold);

  // wdr
  auto *wdr = app.add_subcommand("wdr", "Word deletion rate of hypotheses against references");
  std::string wdr_ref, wdr_hyp;
  wdr->add_option("--ref", wdr_ref)->required();
  wdr->add_option("--hyp", wdr_hyp)->required();

  // lm-ppl
  auto *ppl = app.add_subcommand("lm-ppl", "Perplexity of an ARPA model on a text file");
  std::string ppl_arpa, ppl_text;
  ppl->add_option("--arpa", ppl_arpa)->required();
  ppl->add_option("--text", ppl_text, "One sentence per line")->required();

  // decode-ctc
  auto *ctc = app.add_subcommand("decode-ctc", "CTC prefix beam search over posterior files");
  std::vector<std::string> ctc_post;
  std::string ctc_inv, ctc_blank = "sil", ctc_lex, ctc_arpa;
  FusionWeights ctc_w;
  size_t ctc_nbest = 1;
  ctc->add_option("--posteriors", ctc_post, "SPFM posterior matrices")->required();
  ctc->add_option("--inventory", ctc_inv, "Label list file, or 'cmudict'");
  ctc->add_option("--blank", ctc_blank);
  ctc->add_option("--lexicon", ctc_lex);
  ctc->add_option("--arpa", ctc_arpa);
  ctc->add_option("--lambda-lm", ctc_w.lambda_lm);
  ctc->add_option("--lambda-ilm", ctc_w.lambda_ilm);
  ctc->add_option("--word-penalty", ctc_w.word_insertion_penalty);
  ctc->add_option("--beam", ctc_w.beam_size)->check(CLI::PositiveNumber);
  ctc->add_option("--nbest", ctc_nbest)->check(CLI::PositiveNumber);

  // decode-aed
  auto *aed = app.add_subcommand("decode-aed", "Label-synchronous beam search with ILM subtraction");
  std::string aed_scorer, aed_ilm, aed_inv, aed_lex, aed_arpa;
  FusionWeights aed_w;
  size_t aed_max_len = 50, aed_nbest = 1;
  aed->add_option("--scorer", aed_scorer, "Contextual score table (JSON)")->required();
  aed->add_option("--ilm", aed_ilm, "Prefix score table for the ILM; default: zeroed context");
  aed->add_option("--inventory", aed_inv)->required();
  aed->add_option("--lexicon", aed_lex, "Checked against the inventory when given");
  aed->add_option("--arpa", aed_arpa);
  aed->add_option("--lambda-lm", aed_w.lambda_lm);
  aed->add_option("--lambda-ilm", aed_w.lambda_ilm);
  aed->add_option("--label-penalty", aed_w.word_insertion_penalty);
  aed->add_option("--beam", aed_w.beam_size)->check(CLI::PositiveNumber);
  aed->add_option("--max-len", aed_max_len);
  aed->add_option("--nbest", aed_nbest)->check(CLI::PositiveNumber);
  aed->add_flag("--length-normalize", aed_w.length_normalize);

  // pipeline
  auto *pipe = app.add_subcommand("pipeline", "Run pipeline stages from a config file");
  std::vector<std::string> stage_names, overrides;
  pipe->add_option("--stages", stage_names, "features,train,align,trim,metrics (default all)")
      ->delimiter(',');
  pipe->add_option("--set", overrides, "Config override section.key=value (repeatable)");

  // synth-fixture
  auto *syn = app.add_subcommand("synth-fixture", "Write the synthetic test corpus");
  std::string syn_out;
  FixtureSpec spec;
  syn->add_option("--out-dir", syn_out)->required();
  syn->add_option("--seed", spec.seed);
  syn->add_option("--utterances", spec.num_utterances)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(common.log_level));
    const int jobs = common.jobs;

    if (*feat) {
      FeatureConfig fc = feature_config(common.config);
      CorpusManifest m = load_manifest(feat_manifest);
      fs::create_directories(feat_out);
      parallel_for(m.entries.size(), jobs, [&](size_t i) {
        const auto &e = m.entries[i];
        write_feature_matrix(fs::path(feat_out) / (e.id + ".spfm"),
                             compute_mfcc(load_wav(m.audio_path(e)), fc));
      });
      spdlog::info("wrote {} feature files to {}", m.entries.size(), feat_out);
    } else if (*trn) {
      FeatureConfig fc = feature_config(common.config);
      CorpusManifest m = load_manifest(trn_manifest);
      Lexicon lex = load_lexicon(trn_lexicon);
      std::vector<TrainUtterance> corpus(m.entries.size());
      parallel_for(m.entries.size(), jobs, [&](size_t i) {
        const auto &e = m.entries[i];
        corpus[i].id = e.id;
        corpus[i].words = split_words(e.text);
        corpus[i].features = trn_features.empty()
                                 ? compute_mfcc(load_wav(m.audio_path(e)), fc)
                                 : read_feature_matrix(fs::path(trn_features) / (e.id + ".spfm"));
      });
      TrainSchedule sched;
      sched.align_iters = align_iters;
      sched.split_iters = split_iters;
      TrainResult r = train(corpus, lex, PhoneSet::from_lexicon(lex, trn_sil), sched, jobs);
      write_model(fs::path(trn_out), r.model);
      spdlog::info("model written to {} ({} utterances skipped)", trn_out, r.skipped.size());
    } else if (*aln) {
      FeatureConfig fc = feature_config(common.config);
      CorpusManifest m = load_manifest(aln_manifest);
      Lexicon lex = load_lexicon(aln_lexicon);
      GmmHmmModel model = read_model(fs::path(aln_model));
      std::vector<std::optional<Alignment>> alis(m.entries.size());
      parallel_for(m.entries.size(), jobs, [&](size_t i) {
        const auto &e = m.entries[i];
        try {
          AudioBuffer audio = load_wav(m.audio_path(e));
          auto words = split_words(e.text);
          Alignment a = viterbi_align(compute_mfcc(audio, fc), model,
                                      build_state_graph(words, lex, model.phones(), model.config()));
          a.utterance_id = e.id;
          a.frame_shift = fc.frame_shift;
          a.audio_duration = audio.duration_seconds();
          alis[i] = std::move(a);
        } catch (const Error &ex) {
          spdlog::warn("alignment of '{}' failed: {}", e.id, ex.what());
        }
      });
      std::vector<Alignment> ok;
      for (auto &a : alis)
        if (a) ok.push_back(std::move(*a));
      write_alignment_dir(aln_out, ok);
      spdlog::info("wrote {} of {} alignments", ok.size(), alis.size());
    } else if (*trim) {
      PreprocessOptions opts;
      opts.method = parse_silence_method(trim_method);
      policy.remove_boundary_silence = !keep_boundary;
      opts.policy = policy;
      opts.threshold = thr;
      opts.features = feature_config(common.config);
      opts.out_dir = trim_out;
      opts.jobs = jobs;
      std::optional<GmmHmmModel> model;
      std::optional<Lexicon> lex;
      if (opts.method == SilenceMethod::kAlignment) {
        if (trim_model.empty() || trim_lexicon.empty())
          throw ValidationError("--method alignment needs --model and --lexicon");
        model = read_model(fs::path(trim_model));
        lex = load_lexicon(trim_lexicon);
        opts.model = &*model;
        opts.lexicon = &*lex;
      }
      PreprocessReport rep = preprocess_corpus(load_manifest(trim_manifest), opts);
      spdlog::info("removed {:.3f} s of {:.3f} s; {} failed", rep.removed_seconds,
                   rep.input_seconds, rep.failed);
      if (rep.failure_rate_exceeded()) {
        spdlog::error("more than 1% of utterances failed");
        return 2;
      }
    } else if (*udr) {
      auto alis = read_alignment_dir(udr_dir);
      print_ratio("udr", compute_udr(alis, {}, udr_cfg));
    } else if (*wdr) {
      auto refs = read_transcripts(wdr_ref);
      std::map<std::string, std::string> hyps;
      for (auto &[id, text] : read_transcripts(wdr_hyp)) hyps[id] = text;
      std::vector<WordPair> pairs;
      for (const auto &[id, text] : refs) {
        auto it = hyps.find(id);
        pairs.emplace_back(normalize_words(text), it == hyps.end()
                                                      ? std::vector<std::string>{}
                                                      : normalize_words(it->second));
      }
      print_ratio("wdr", compute_wdr(pairs));
    } else if (*ppl) {
      NGramLM lm = load_arpa(ppl_arpa);
      std::ifstream is(ppl_text);
      if (!is) throw IoError("cannot open " + ppl_text);
      std::vector<std::vector<std::string>> sents;
      size_t tokens = 0;
      for (std::string line; std::getline(is, line);) {
        auto words = split_words(line);
        if (words.empty()) continue;
        tokens += words.size() + 1;
        sents.push_back(std::move(words));
      }
      json j = {{"metric", "perplexity"},
                {"value", perplexity(lm, sents)},
                {"sentences", sents.size()},
                {"tokens", tokens}};
      std::cout << j.dump() << "\n";
    } else if (*ctc) {
      LabelInventory inv = inventory_from(ctc_inv, ctc_blank);
      std::optional<Lexicon> lex;
      std::optional<NGramLM> lm;
      if (!ctc_lex.empty()) lex = load_lexicon(ctc_lex);
      if (!ctc_arpa.empty()) lm = load_arpa(ctc_arpa);
      std::vector<json> results(ctc_post.size());
      parallel_for(ctc_post.size(), jobs, [&](size_t i) {
        auto post = PosteriorStream::from_matrix(read_feature_matrix(fs::path(ctc_post[i])));
        auto hyps = ctc_prefix_beam(post, inv, lex ? &*lex : nullptr, lm ? &*lm : nullptr, ctc_w);
        results[i] = {{"posteriors", ctc_post[i]}, {"hypotheses", hypotheses_json(hyps, inv, ctc_nbest)}};
      });
      for (const auto &r : results) std::cout << r.dump() << "\n";
    } else if (*aed) {
      LabelInventory inv = load_inventory(aed_inv, std::nullopt);
      if (!aed_lex.empty()) validate_lexicon(load_lexicon(aed_lex), inv);
      auto scorer = std::make_shared<TableContextualScorer>(TableContextualScorer::load(aed_scorer, inv));
      auto am = bind_context(scorer, std::vector<double>(scorer->context_dim(), 1.0));
      std::unique_ptr<PrefixScorer> ilm;
      if (aed_ilm.empty())
        ilm = zero_ilm_scorer(scorer);
      else
        ilm = std::make_unique<TablePrefixScorer>(TablePrefixScorer::load(aed_ilm, inv));
      std::optional<NGramLM> lm;
      if (!aed_arpa.empty()) lm = load_arpa(aed_arpa);
      auto hyps = label_sync_beam(*am, *ilm, inv, lm ? &*lm : nullptr, aed_w, aed_max_len);
      std::cout << json{{"hypotheses", hypotheses_json(hyps, inv, aed_nbest)}}.dump() << "\n";
    } else if (*pipe) {
      if (common.config.empty()) throw ValidationError("pipeline needs --config");
      if (app.count("--jobs")) overrides.push_back(fmt::format("jobs={}", jobs));
      PipelineConfig cfg = load_config(common.config, overrides);
      std::vector<Stage> stages;
      for (const auto &s : stage_names) stages.push_back(parse_stage(s));
      if (stages.empty()) stages = all_stages();
      run_pipeline(cfg, stages);
      std::ifstream is(cfg.paths.run_dir / kRunReportFile);
      std::cout << is.rdbuf();
    } else if (*syn) {
      write_fixture_corpus(syn_out, make_fixture_corpus(spec));
      spdlog::info("fixture corpus written to {}", syn_out);
    }
  } catch (const ValidationError &e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
