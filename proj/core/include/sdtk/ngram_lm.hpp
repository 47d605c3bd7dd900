// core/include/sdtk/ngram_lm.hpp

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
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sdtk {

/// Word history, at most order-1 word ids, oldest first.
struct LmState {
  std::vector<int> history;
  bool operator==(const LmState &) const = default;
  auto operator<=>(const LmState &) const = default;
};

/// Backoff n-gram model read from ARPA text. Scores are log10, as in the
/// file; callers convert at their own boundary. Immutable after loading.
class NGramLM {
 public:
  static constexpr int kNoWord = -1;

  int order() const { return static_cast<int>(tables_.size()); }
  size_t vocab_size() const { return vocab_.size(); }
  size_t num_ngrams(int n) const { return tables_.at(static_cast<size_t>(n - 1)).size(); }
  const std::vector<std::string> &vocabulary() const { return vocab_; }

  /// kNoWord when absent.
  int word_id(const std::string &word) const;
  const std::string &word(int id) const { return vocab_.at(static_cast<size_t>(id)); }
  int bos() const { return bos_; }
  int eos() const { return eos_; }
  int unk() const { return unk_; }

  /// log10 score used for out-of-vocabulary words when the model has no <unk>.
  double oov_floor() const { return oov_floor_; }
  void set_oov_floor(double log10_prob) { oov_floor_ = log10_prob; }

  /// History holding just <s>.
  LmState begin_state() const;

  /// Katz backoff score of `word` after `state`, and the successor state:
  /// the longest suffix of history+word stored as an n-gram.
  std::pair<double, LmState> score_word(const LmState &state, const std::string &word) const;
  std::pair<double, LmState> score_id(const LmState &state, int id) const;

  /// Explicit n-gram lookup; returns false if not stored.
  bool find(std::span<const int> ngram, double *log10_prob, double *backoff) const;

  /// log10 P of the words followed by </s>, conditioned on <s>.
  double sentence_log10prob(std::span<const std::string> words) const;

  void write_arpa(std::ostream &os) const;

  friend NGramLM parse_arpa(std::istream &is, const std::string &what);

 private:
  struct Entry {
    double log10_prob = 0.0;
    double backoff = 0.0;
  };
  struct KeyHash {
    size_t operator()(const std::vector<int> &key) const noexcept;
  };
  using Table = std::unordered_map<std::vector<int>, Entry, KeyHash>;

  const Entry *lookup(std::span<const int> ngram) const;

  std::vector<Table> tables_;  // tables_[n-1] holds n-grams
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> ids_;
  int bos_ = kNoWord;
  int eos_ = kNoWord;
  int unk_ = kNoWord;
  double oov_floor_ = -10.0;
};

/// Throws ParseError (with line numbers) on malformed input, header/section
/// count mismatches, n-grams whose context is not stored, or a missing
/// \end\ marker.
NGramLM parse_arpa(std::istream &is, const std::string &what = "<stream>");
NGramLM load_arpa(const std::filesystem::path &path);

/// 10^(-total log10 prob / predicted tokens); each sentence predicts its
/// words plus </s>. Throws ValidationError on an empty corpus.
double perplexity(const NGramLM &lm, std::span<const std::vector<std::string>> sentences);

}  // namespace sdtk
