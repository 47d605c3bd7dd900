// core/include/sdtk/scorers.hpp

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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sdtk {

class LabelInventory;

/// Next-label distribution given a label prefix. The returned vector holds
/// natural-log probabilities over num_labels() labels followed by one
/// end-of-sequence entry.
class PrefixScorer {
 public:
  virtual ~PrefixScorer() = default;
  virtual size_t num_labels() const = 0;
  virtual std::vector<double> next_log_probs(std::span<const int> prefix) const = 0;
};

/// A prefix scorer that also consumes an acoustic context vector, the
/// shape of an attention decoder step.
class ContextualScorer {
 public:
  virtual ~ContextualScorer() = default;
  virtual size_t num_labels() const = 0;
  virtual size_t context_dim() const = 0;
  virtual std::vector<double> next_log_probs(std::span<const int> prefix,
                                             std::span<const double> context) const = 0;
};

/// Fixes the context of `scorer` to `context`.
std::unique_ptr<PrefixScorer> bind_context(std::shared_ptr<const ContextualScorer> scorer,
                                           std::vector<double> context);

/// Internal LM estimate: queries `scorer` with an all-zero context and
/// renormalizes the result with a log-softmax.
std::unique_ptr<PrefixScorer> zero_ilm_scorer(std::shared_ptr<const ContextualScorer> scorer);

/// log-softmax in place; returns the log normalizer that was removed.
double log_normalize(std::vector<double> &log_probs);

/// Prefix string -> log-prob row. Keys are label names joined by single
/// spaces ("" for the empty prefix). Rows have num_labels + 1 entries.
using ScoreTable = std::map<std::string, std::vector<double>>;

/// File-backed scorer over an enumerated set of prefixes; asking for a
/// prefix missing from the table throws.
class TablePrefixScorer : public PrefixScorer {
 public:
  TablePrefixScorer(ScoreTable table, std::vector<std::string> label_names);

  /// JSON object mapping prefix strings to arrays of log-probs.
  static TablePrefixScorer load(const std::filesystem::path &path, const LabelInventory &inv);

  size_t num_labels() const override { return names_.size(); }
  std::vector<double> next_log_probs(std::span<const int> prefix) const override;
  std::string key(std::span<const int> prefix) const;

 private:
  ScoreTable table_;
  std::vector<std::string> names_;
};

/// Table-backed contextual scorer: rows from `zero_table` answer queries
/// whose context is all zeros, rows from `context_table` everything else.
class TableContextualScorer : public ContextualScorer {
 public:
  TableContextualScorer(ScoreTable context_table, ScoreTable zero_table,
                        std::vector<std::string> label_names, size_t context_dim = 1);

  /// JSON object {"context_dim": n, "context": {...}, "zero_context": {...}}.
  static TableContextualScorer load(const std::filesystem::path &path, const LabelInventory &inv);

  size_t num_labels() const override { return context_.num_labels(); }
  size_t context_dim() const override { return dim_; }
  std::vector<double> next_log_probs(std::span<const int> prefix,
                                     std::span<const double> context) const override;

 private:
  TablePrefixScorer context_;
  TablePrefixScorer zero_;
  size_t dim_;
};

/// Presents a PrefixScorer as a ContextualScorer that ignores the context.
class ContextFreeAdapter : public ContextualScorer {
 public:
  ContextFreeAdapter(std::shared_ptr<const PrefixScorer> inner, size_t context_dim = 1)
      : inner_(std::move(inner)), dim_(context_dim) {}
  size_t num_labels() const override { return inner_->num_labels(); }
  size_t context_dim() const override { return dim_; }
  std::vector<double> next_log_probs(std::span<const int> prefix,
                                     std::span<const double>) const override {
    return inner_->next_log_probs(prefix);
  }

 private:
  std::shared_ptr<const PrefixScorer> inner_;
  size_t dim_;
};

}  // namespace sdtk
