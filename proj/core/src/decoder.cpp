// core/src/decoder.cpp

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

#include "sdtk/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sdtk/error.hpp"

namespace sdtk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLn10 = std::log(10.0);

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Orders by descending rank, then ascending label sequence.
bool ranks_before(double sa, const std::vector<int> &la, double sb, const std::vector<int> &lb) {
  if (sa != sb) return sa > sb;
  return la < lb;
}

void sort_ranked(std::vector<Hypothesis> &hyps) {
  std::sort(hyps.begin(), hyps.end(), [](const Hypothesis &a, const Hypothesis &b) {
    return ranks_before(a.rank_score, a.labels, b.rank_score, b.labels);
  });
}

// Pronunciation trie over label indices. Nodes reached through an
// end-of-word label hold the words spelled by the path, in lexicon order.
struct LexTrie {
  struct Node {
    std::map<int, size_t> children;
    std::vector<std::string> words;
  };
  std::vector<Node> nodes{1};

  LexTrie(const Lexicon &lex, const LabelInventory &inv) {
    for (const auto &w : lex.words()) {
      for (const auto &pron : *lex.find(w)) {
        size_t n = 0;
        for (const auto &ph : pron) {
          int id = inv.index(ph);
          auto it = nodes[n].children.find(id);
          if (it == nodes[n].children.end()) {
            nodes.emplace_back();
            it = nodes[n].children.emplace(id, nodes.size() - 1).first;
          }
          n = it->second;
        }
        auto &ws = nodes[n].words;
        if (std::find(ws.begin(), ws.end(), w) == ws.end()) ws.push_back(w);
      }
    }
  }
};

struct CtcBeam {
  double pb = kNegInf;   // ends in blank
  double pnb = kNegInf;  // ends in a label
  size_t node = 0;       // trie position (0 = word boundary)
  LmState lm_state;
  double lm = 0.0;  // natural log
  std::vector<std::string> words;

  double am() const { return log_add(pb, pnb); }
};

double ctc_fused(const CtcBeam &b, const FusionWeights &w) {
  return fuse(b.am(), b.lm, 0.0, w) + w.word_insertion_penalty * static_cast<double>(b.words.size());
}

void check_normalized(const std::vector<double> &row, size_t expected, size_t step,
                      const char *which) {
  if (row.size() != expected)
    throw ValidationError(fmt::format("{} scorer returned {} scores at step {}, expected {}", which,
                                      row.size(), step, expected));
  double z = kNegInf;
  for (double v : row) {
    if (std::isnan(v)) throw NumericError(fmt::format("{} scorer returned NaN at step {}", which, step));
    z = log_add(z, v);
  }
  if (!(std::abs(std::exp(z) - 1.0) <= 1e-5))
    throw NumericError(fmt::format("{} scorer distribution not normalized at step {} (mass {:.8g})",
                                   which, step, std::exp(z)));
}

}  // namespace

LabelInventory::LabelInventory(std::vector<std::string> labels, std::optional<std::string> blank)
    : labels_(std::move(labels)) {
  if (labels_.empty()) throw ValidationError("label inventory is empty");
  std::vector<std::string> sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end())
    throw ValidationError("duplicate label '" + *dup + "' in inventory");
  if (blank) {
    int b = index(*blank);
    if (b < 0) throw ValidationError("blank label '" + *blank + "' not in inventory");
    blank_ = static_cast<size_t>(b);
  }
}

LabelInventory LabelInventory::cmudict(const std::string &blank) {
  static const char *kVowels[] = {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
                                  "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
  static const char *kConsonants[] = {"B", "CH", "D",  "DH", "F", "G",  "HH", "JH",
                                      "K", "L",  "M",  "N",  "NG", "P", "R",  "S",
                                      "SH", "T", "TH", "V",  "W",  "Y", "Z",  "ZH"};
  std::vector<std::string> phones;
  for (const char *v : kVowels)
    for (int s = 0; s < 3; ++s) phones.push_back(fmt::format("{}{}", v, s));
  for (const char *c : kConsonants) phones.emplace_back(c);
  std::vector<std::string> labels = phones;
  for (const auto &p : phones) labels.push_back(p + kEowMarker);
  labels.push_back(blank);
  return LabelInventory(std::move(labels), blank);
}

int LabelInventory::index(const std::string &label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

LabelInventory load_inventory(const std::filesystem::path &path,
                              const std::optional<std::string> &blank) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::string> labels;
  for (std::string line; std::getline(is, line);) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    labels.push_back(line.substr(b, e - b + 1));
  }
  return LabelInventory(std::move(labels), blank);
}

void validate_lexicon(const Lexicon &lex, const LabelInventory &inv) {
  lex.validate();
  for (const auto &w : lex.words())
    for (const auto &pron : *lex.find(w))
      for (const auto &ph : pron) {
        int id = inv.index(ph);
        if (id < 0)
          throw ValidationError(fmt::format("lexicon word '{}' uses label '{}' missing from the inventory", w, ph));
        if (inv.blank_index() && static_cast<size_t>(id) == *inv.blank_index())
          throw ValidationError(fmt::format("lexicon word '{}' uses the blank label", w));
      }
}

void PosteriorStream::validate() const {
  if (labels == 0) throw ValidationError("posterior stream has no labels");
  if (probs.size() != frames * labels)
    throw ValidationError("posterior stream size does not match its shape");
  for (size_t t = 0; t < frames; ++t) {
    double sum = 0.0;
    for (size_t l = 0; l < labels; ++l) {
      double p = at(t, l);
      if (!(p >= 0.0)) throw ValidationError(fmt::format("negative or NaN posterior at frame {}", t));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-5)
      throw ValidationError(fmt::format("posterior row {} sums to {:.8g}", t, sum));
  }
}

PosteriorStream PosteriorStream::from_matrix(const FeatureMatrix &m) {
  PosteriorStream s;
  s.frames = m.frames;
  s.labels = m.dims;
  s.probs.assign(m.values.begin(), m.values.end());
  return s;
}

void FusionWeights::validate() const {
  if (!(lambda_lm >= 0.0) || !std::isfinite(lambda_lm))
    throw ValidationError("lambda_lm must be a finite value >= 0");
  if (!(lambda_ilm >= 0.0) || !std::isfinite(lambda_ilm))
    throw ValidationError("lambda_ilm must be a finite value >= 0");
  if (!std::isfinite(word_insertion_penalty))
    throw ValidationError("word_insertion_penalty must be finite");
  if (beam_size < 1) throw ValidationError("beam_size must be at least 1");
}

double fuse(double score_am, double score_lm, double score_ilm, const FusionWeights &w) {
  if (std::isnan(score_am) || std::isnan(score_lm) || std::isnan(score_ilm))
    throw NumericError("NaN score passed to fuse");
  double lm = w.lambda_lm == 0.0 ? 0.0 : w.lambda_lm * score_lm;
  double ilm = w.lambda_ilm == 0.0 ? 0.0 : w.lambda_ilm * score_ilm;
  return score_am + lm - ilm;
}

double recompose_total(const Hypothesis &h, const FusionWeights &w) {
  return fuse(h.score_am, h.score_lm, h.score_ilm, w) +
         w.word_insertion_penalty * static_cast<double>(h.num_penalized);
}

std::vector<Hypothesis> ctc_prefix_beam(const PosteriorStream &posteriors,
                                        const LabelInventory &inventory, const Lexicon *lexicon,
                                        const NGramLM *lm, const FusionWeights &weights) {
  weights.validate();
  posteriors.validate();
  if (posteriors.labels != inventory.size())
    throw ValidationError(fmt::format("posterior stream has {} labels, inventory has {}",
                                      posteriors.labels, inventory.size()));
  if (!inventory.blank_index()) throw ValidationError("CTC decoding needs a blank label");
  const int blank = static_cast<int>(*inventory.blank_index());
  if (lm && !lexicon) throw ValidationError("an LM requires a lexicon to define words");

  std::unique_ptr<LexTrie> trie;
  if (lexicon) {
    if (!lexicon->eow_marking())
      throw ValidationError("CTC decoding needs a lexicon with end-of-word markers");
    validate_lexicon(*lexicon, inventory);
    trie = std::make_unique<LexTrie>(*lexicon, inventory);
  }

  std::vector<int> free_labels;
  for (size_t l = 0; l < inventory.size(); ++l)
    if (static_cast<int>(l) != blank) free_labels.push_back(static_cast<int>(l));

  std::map<std::vector<int>, CtcBeam> beams;
  {
    CtcBeam root;
    root.pb = 0.0;
    if (lm) root.lm_state = lm->begin_state();
    beams.emplace(std::vector<int>{}, std::move(root));
  }

  // Extends `parent` by `label`, returning a fresh beam entry without mass.
  auto extend = [&](const CtcBeam &parent, int label) {
    CtcBeam b;
    b.lm_state = parent.lm_state;
    b.lm = parent.lm;
    b.words = parent.words;
    if (!trie) return b;
    size_t child = trie->nodes[parent.node].children.at(label);
    const auto &words = trie->nodes[child].words;
    if (words.empty()) {
      b.node = child;
      return b;
    }
    // Homophones: keep the one the LM prefers, earliest in the lexicon on ties.
    size_t best = 0;
    double best_lp = 0.0;
    LmState best_state;
    if (lm) {
      for (size_t i = 0; i < words.size(); ++i) {
        auto [lp, st] = lm->score_word(parent.lm_state, words[i]);
        if (i == 0 || lp > best_lp) {
          best = i;
          best_lp = lp;
          best_state = std::move(st);
        }
      }
      b.lm += best_lp * kLn10;
      b.lm_state = std::move(best_state);
    }
    b.words.push_back(words[best]);
    b.node = 0;
    return b;
  };

  for (size_t t = 0; t < posteriors.frames; ++t) {
    std::map<std::vector<int>, CtcBeam> next;
    const double lp_blank = safe_log(posteriors.at(t, static_cast<size_t>(blank)));
    for (const auto &[prefix, beam] : beams) {
      const double total = beam.am();
      auto [it, fresh] = next.try_emplace(prefix, beam);
      if (fresh) it->second.pb = it->second.pnb = kNegInf;
      it->second.pb = log_add(it->second.pb, total + lp_blank);
      if (!prefix.empty()) {
        int last = prefix.back();
        it->second.pnb =
            log_add(it->second.pnb, beam.pnb + safe_log(posteriors.at(t, static_cast<size_t>(last))));
      }

      auto consider = [&](int c) {
        const double lp = safe_log(posteriors.at(t, static_cast<size_t>(c)));
        std::vector<int> longer = prefix;
        longer.push_back(c);
        auto nit = next.find(longer);
        if (nit == next.end()) nit = next.emplace(std::move(longer), extend(beam, c)).first;
        double from = (!prefix.empty() && prefix.back() == c) ? beam.pb : total;
        nit->second.pnb = log_add(nit->second.pnb, from + lp);
      };
      if (trie) {
        for (const auto &kv : trie->nodes[beam.node].children) consider(kv.first);
      } else {
        for (int c : free_labels) consider(c);
      }
    }

    // A prefix reached only through zero-probability paths can never gain mass.
    std::erase_if(next, [](const auto &kv) { return kv.second.am() == kNegInf; });
    std::vector<std::pair<double, const std::vector<int> *>> ranked;
    ranked.reserve(next.size());
    for (const auto &kv : next) ranked.emplace_back(ctc_fused(kv.second, weights), &kv.first);
    if (ranked.size() > weights.beam_size) {
      std::nth_element(ranked.begin(), ranked.begin() + static_cast<long>(weights.beam_size) - 1,
                       ranked.end(), [](const auto &a, const auto &b) {
                         return ranks_before(a.first, *a.second, b.first, *b.second);
                       });
      std::map<std::vector<int>, CtcBeam> kept;
      for (size_t i = 0; i < weights.beam_size; ++i) {
        auto node = next.extract(*ranked[i].second);
        kept.insert(std::move(node));
      }
      next = std::move(kept);
    }
    beams = std::move(next);
  }

  std::vector<Hypothesis> complete, partial;
  for (const auto &[prefix, beam] : beams) {
    Hypothesis h;
    h.labels = prefix;
    h.words = beam.words;
    h.score_am = beam.am();
    h.score_lm = beam.lm;
    h.num_penalized = beam.words.size();
    h.complete = beam.node == 0;
    if (h.complete && lm) h.score_lm += lm->score_id(beam.lm_state, lm->eos()).first * kLn10;
    h.score_total = recompose_total(h, weights);
    h.rank_score = h.score_total;
    (h.complete ? complete : partial).push_back(std::move(h));
  }
  if (complete.empty()) {
    spdlog::warn("no hypothesis reached a word boundary; returning the best partial ones");
    sort_ranked(partial);
    return partial;
  }
  sort_ranked(complete);
  return complete;
}

std::vector<Hypothesis> label_sync_beam(const PrefixScorer &am, const PrefixScorer &ilm,
                                        const LabelInventory &inventory, const NGramLM *lm,
                                        const FusionWeights &weights, size_t max_len) {
  weights.validate();
  const size_t L = inventory.size();
  if (am.num_labels() != L || ilm.num_labels() != L)
    throw ValidationError(fmt::format("scorers cover {} and {} labels, inventory has {}",
                                      am.num_labels(), ilm.num_labels(), L));
  const size_t eos = L;

  struct Partial {
    std::vector<int> labels;
    double am = 0.0, lm = 0.0, ilm = 0.0, total = 0.0;
    LmState lm_state;
  };
  std::vector<Partial> active(1);
  if (lm) active[0].lm_state = lm->begin_state();
  std::vector<Hypothesis> finished;

  for (size_t step = 0; !active.empty(); ++step) {
    std::vector<Partial> candidates;
    for (const auto &p : active) {
      auto am_row = am.next_log_probs(p.labels);
      auto ilm_row = ilm.next_log_probs(p.labels);
      check_normalized(am_row, L + 1, step, "acoustic");
      check_normalized(ilm_row, L + 1, step, "internal LM");
      const bool must_end = p.labels.size() >= max_len;
      for (size_t j = must_end ? eos : 0; j <= L; ++j) {
        double lm_step = 0.0;
        LmState st;
        if (lm) {
          auto scored = j == eos ? lm->score_id(p.lm_state, lm->eos())
                                 : lm->score_word(p.lm_state, inventory.label(j));
          lm_step = scored.first * kLn10;
          st = std::move(scored.second);
        }
        Partial c;
        c.labels = p.labels;
        c.am = p.am + am_row[j];
        c.lm = p.lm + lm_step;
        c.ilm = p.ilm + ilm_row[j];
        c.total = p.total + fuse(am_row[j], lm_step, ilm_row[j], weights) +
                  (j == eos ? 0.0 : weights.word_insertion_penalty);
        if (j == eos) {
          Hypothesis h;
          h.labels = std::move(c.labels);
          for (int l : h.labels) h.words.push_back(inventory.label(static_cast<size_t>(l)));
          h.score_am = c.am;
          h.score_lm = c.lm;
          h.score_ilm = c.ilm;
          h.num_penalized = h.labels.size();
          h.score_total = c.total;
          h.rank_score = weights.length_normalize
                             ? h.score_total / static_cast<double>(h.labels.size() + 1)
                             : h.score_total;
          finished.push_back(std::move(h));
        } else {
          c.labels.push_back(static_cast<int>(j));
          c.lm_state = std::move(st);
          candidates.push_back(std::move(c));
        }
      }
    }
    auto better = [](const Partial &a, const Partial &b) {
      return ranks_before(a.total, a.labels, b.total, b.labels);
    };
    if (candidates.size() > weights.beam_size) {
      std::nth_element(candidates.begin(),
                       candidates.begin() + static_cast<long>(weights.beam_size) - 1,
                       candidates.end(), better);
      candidates.resize(weights.beam_size);
    }
    std::sort(candidates.begin(), candidates.end(), better);
    active = std::move(candidates);
  }
  sort_ranked(finished);
  return finished;
}

}  // namespace sdtk
