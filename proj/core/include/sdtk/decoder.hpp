// core/include/sdtk/decoder.hpp

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

#include "sdtk/features.hpp"
#include "sdtk/lexicon.hpp"
#include "sdtk/ngram_lm.hpp"
#include "sdtk/scorers.hpp"

namespace sdtk {

/// Ordered output labels. For CTC the inventory contains one unified
/// silence/blank label, which the search treats as the blank.
class LabelInventory {
 public:
  LabelInventory() = default;
  LabelInventory(std::vector<std::string> labels, std::optional<std::string> blank);

  /// CMUDict phonemes with stress markers, each with and without the
  /// end-of-word marker, plus the blank: 69 * 2 + 1 = 139 labels.
  static LabelInventory cmudict(const std::string &blank = "sil");

  size_t size() const { return labels_.size(); }
  const std::string &label(size_t i) const { return labels_.at(i); }
  const std::vector<std::string> &labels() const { return labels_; }
  int index(const std::string &label) const;  // -1 when absent
  std::optional<size_t> blank_index() const { return blank_; }
  bool is_eow(size_t i) const { return has_eow_marker(labels_.at(i)); }

 private:
  std::vector<std::string> labels_;
  std::optional<size_t> blank_;
};

/// One label per line. `blank` names the blank label, if any.
LabelInventory load_inventory(const std::filesystem::path &path,
                              const std::optional<std::string> &blank);

/// Throws ValidationError unless every lexicon phone is an inventory label.
void validate_lexicon(const Lexicon &lex, const LabelInventory &inv);

/// Frames x labels matrix of CTC output probabilities.
struct PosteriorStream {
  size_t frames = 0;
  size_t labels = 0;
  std::vector<double> probs;

  double at(size_t t, size_t l) const { return probs[t * labels + l]; }
  /// Rows must be non-negative and sum to 1 within 1e-5.
  void validate() const;

  static PosteriorStream from_matrix(const FeatureMatrix &m);
};

struct FusionWeights {
  double lambda_lm = 0.0;
  double lambda_ilm = 0.0;
  double word_insertion_penalty = 0.0;
  size_t beam_size = 8;
  // Ranks finished hypotheses by score per output step; scores unchanged.
  bool length_normalize = false;

  void validate() const;
};

/// All scores are natural-log. score_total = score_am + lambda_lm * score_lm
/// - lambda_ilm * score_ilm + word_insertion_penalty * num_penalized.
struct Hypothesis {
  std::vector<int> labels;
  std::vector<std::string> words;
  double score_total = 0.0;
  double score_am = 0.0;
  double score_lm = 0.0;
  double score_ilm = 0.0;
  size_t num_penalized = 0;  // words (CTC) or emitted labels (label-synchronous)
  bool complete = true;      // ended on a word boundary / with end-of-sequence
  double rank_score = 0.0;
};

/// Log-linear combination am + lambda_lm * lm - lambda_ilm * ilm. Throws
/// NumericError on NaN input.
double fuse(double score_am, double score_lm, double score_ilm, const FusionWeights &w);

/// Recomputes score_total from the components.
double recompose_total(const Hypothesis &h, const FusionWeights &w);

/// CTC prefix beam search. With a lexicon (which must use end-of-word
/// markers), prefixes are restricted to lexicon label sequences and a word
/// is emitted whenever an end-of-word label completes a pronunciation; the
/// LM score of the word and the insertion penalty are added there. At the
/// end, </s> is scored for hypotheses on a word boundary. Without a
/// lexicon the search runs over free label sequences and emits no words.
/// If no hypothesis ends on a word boundary the best partial ones are
/// returned with complete = false.
std::vector<Hypothesis> ctc_prefix_beam(const PosteriorStream &posteriors,
                                        const LabelInventory &inventory, const Lexicon *lexicon,
                                        const NGramLM *lm, const FusionWeights &weights);

/// Label-synchronous beam search over an attention-style scorer. Each step
/// adds fuse(am, lm, ilm) for the chosen label, plus the insertion penalty
/// for non-terminal labels. A hypothesis ends when it picks
/// end-of-sequence; after `max_len` labels only end-of-sequence is allowed.
/// LM tokens are the label names, with </s> for end-of-sequence. Throws
/// NumericError naming the step if a scorer row is not normalized.
std::vector<Hypothesis> label_sync_beam(const PrefixScorer &am, const PrefixScorer &ilm,
                                        const LabelInventory &inventory, const NGramLM *lm,
                                        const FusionWeights &weights, size_t max_len);

}  // namespace sdtk
