// core/include/sdtk/metrics.hpp

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

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdtk/gmm_hmm.hpp"

namespace sdtk {

enum class EditKind { kMatch, kSubstitute, kDelete, kInsert };

// ref_pos/hyp_pos index the consumed word; for kInsert ref_pos is the
// reference position the insertion precedes, for kDelete hyp_pos likewise.
struct EditOp {
  EditKind kind;
  size_t ref_pos = 0;
  size_t hyp_pos = 0;
  bool operator==(const EditOp &) const = default;
};

struct EditScript {
  std::vector<EditOp> ops;
  size_t substitutions = 0;
  size_t deletions = 0;
  size_t insertions = 0;
  size_t ref_words = 0;

  size_t cost() const { return substitutions + deletions + insertions; }
};

/// Unit-cost Levenshtein alignment. Among optimal scripts the backtrace
/// prefers match, then substitution, then deletion, then insertion.
EditScript levenshtein_align(std::span<const std::string> ref, std::span<const std::string> hyp);

/// Rebuilds the hypothesis by replaying `script` over `ref`.
std::vector<std::string> apply_edit_script(const EditScript &script,
                                           std::span<const std::string> ref,
                                           std::span<const std::string> hyp);

struct TextNormalization {
  bool lowercase = true;
  bool strip_punctuation = true;  // apostrophes inside words are kept
};

std::vector<std::string> normalize_words(std::string_view text,
                                         const TextNormalization &norm = {});

/// value = numerator / denominator, reported together.
struct RatioMetric {
  double value = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

using WordPair = std::pair<std::vector<std::string>, std::vector<std::string>>;

/// Corpus-level word deletion rate: total deletions over total reference
/// words. Throws ValidationError on an empty reference.
RatioMetric compute_wdr(std::span<const WordPair> pairs);

struct UdrConfig {
  double unaligned_threshold = 1.0;  // seconds
  void validate() const;
};

/// Corpus-level unaligned duration ratio: total duration of silence runs
/// strictly longer than the threshold over total audio duration. When
/// `total_durations` is empty each alignment's own total_duration() is used.
RatioMetric compute_udr(std::span<const Alignment> alignments,
                        std::span<const double> total_durations, const UdrConfig &cfg);

}  // namespace sdtk
