// core/src/metrics.cpp

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

#include "sdtk/metrics.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "sdtk/error.hpp"

namespace sdtk {

EditScript levenshtein_align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const size_t R = ref.size(), H = hyp.size();
  std::vector<size_t> d((R + 1) * (H + 1));
  auto at = [&](size_t i, size_t j) -> size_t & { return d[i * (H + 1) + j]; };
  for (size_t i = 0; i <= R; ++i) at(i, 0) = i;
  for (size_t j = 0; j <= H; ++j) at(0, j) = j;
  for (size_t i = 1; i <= R; ++i) {
    for (size_t j = 1; j <= H; ++j) {
      size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  EditScript script;
  script.ref_words = R;
  size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i, j) == at(i - 1, j - 1)) {
      script.ops.push_back({EditKind::kMatch, i - 1, j - 1});
      --i, --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && at(i, j) == at(i - 1, j - 1) + 1) {
      script.ops.push_back({EditKind::kSubstitute, i - 1, j - 1});
      ++script.substitutions;
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      script.ops.push_back({EditKind::kDelete, i - 1, j});
      ++script.deletions;
      --i;
    } else {
      script.ops.push_back({EditKind::kInsert, i, j - 1});
      ++script.insertions;
      --j;
    }
  }
  std::reverse(script.ops.begin(), script.ops.end());
  return script;
}

std::vector<std::string> apply_edit_script(const EditScript &script,
                                           std::span<const std::string> ref,
                                           std::span<const std::string> hyp) {
  std::vector<std::string> out;
  for (const auto &op : script.ops) {
    switch (op.kind) {
      case EditKind::kMatch: out.push_back(ref[op.ref_pos]); break;
      case EditKind::kSubstitute:
      case EditKind::kInsert: out.push_back(hyp[op.hyp_pos]); break;
      case EditKind::kDelete: break;
    }
  }
  return out;
}

std::vector<std::string> normalize_words(std::string_view text, const TextNormalization &norm) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (norm.strip_punctuation && std::ispunct(c) && c != '\'') continue;
    cleaned.push_back(norm.lowercase ? static_cast<char>(std::tolower(c)) : ch);
  }
  auto words = split_words(cleaned);
  if (norm.strip_punctuation) {
    for (auto &w : words) {
      auto b = w.find_first_not_of('\'');
      auto e = w.find_last_not_of('\'');
      w = b == std::string::npos ? std::string() : w.substr(b, e - b + 1);
    }
    std::erase_if(words, [](const std::string &w) { return w.empty(); });
  }
  return words;
}

RatioMetric compute_wdr(std::span<const WordPair> pairs) {
  RatioMetric m;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto &[ref, hyp] = pairs[k];
    if (ref.empty()) throw ValidationError(fmt::format("empty reference in pair {}", k));
    auto script = levenshtein_align(ref, hyp);
    m.numerator += static_cast<double>(script.deletions);
    m.denominator += static_cast<double>(script.ref_words);
  }
  m.value = m.denominator > 0 ? m.numerator / m.denominator : 0.0;
  return m;
}

void UdrConfig::validate() const {
  if (!(unaligned_threshold > 0.0))
    throw ValidationError("metrics.udr_threshold must be positive");
}

RatioMetric compute_udr(std::span<const Alignment> alignments,
                        std::span<const double> total_durations, const UdrConfig &cfg) {
  cfg.validate();
  if (!total_durations.empty() && total_durations.size() != alignments.size())
    throw ValidationError("one total duration per alignment expected");
  // Tolerates frame-shift rounding so that a run of exactly the threshold
  // never counts.
  constexpr double kEps = 1e-9;
  RatioMetric m;
  for (size_t k = 0; k < alignments.size(); ++k) {
    const auto &ali = alignments[k];
    size_t t = 0;
    while (t < ali.num_frames()) {
      if (!ali.is_silence(t)) {
        ++t;
        continue;
      }
      size_t end = t;
      while (end < ali.num_frames() && ali.is_silence(end)) ++end;
      double run = static_cast<double>(end - t) * ali.frame_shift;
      if (run > cfg.unaligned_threshold + kEps) m.numerator += run;
      t = end;
    }
    m.denominator += total_durations.empty() ? ali.total_duration() : total_durations[k];
  }
  m.value = m.denominator > 0 ? m.numerator / m.denominator : 0.0;
  return m;
}

}  // namespace sdtk
