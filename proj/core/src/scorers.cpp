// core/src/scorers.cpp

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

#include "sdtk/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "sdtk/decoder.hpp"
#include "sdtk/error.hpp"

namespace sdtk {

namespace {

class BoundContextScorer : public PrefixScorer {
 public:
  BoundContextScorer(std::shared_ptr<const ContextualScorer> inner, std::vector<double> context,
                     bool renormalize)
      : inner_(std::move(inner)), context_(std::move(context)), renormalize_(renormalize) {
    if (context_.size() != inner_->context_dim())
      throw ValidationError(fmt::format("context of size {} for a scorer expecting {}",
                                        context_.size(), inner_->context_dim()));
  }
  size_t num_labels() const override { return inner_->num_labels(); }
  std::vector<double> next_log_probs(std::span<const int> prefix) const override {
    auto row = inner_->next_log_probs(prefix, context_);
    if (renormalize_) log_normalize(row);
    return row;
  }

 private:
  std::shared_ptr<const ContextualScorer> inner_;
  std::vector<double> context_;
  bool renormalize_;
};

ScoreTable parse_table(const nlohmann::json &j, size_t row_size, const std::string &what) {
  if (!j.is_object()) throw ParseError(what + ": expected an object of prefix -> scores");
  ScoreTable table;
  for (const auto &[key, val] : j.items()) {
    if (!val.is_array() || val.size() != row_size)
      throw ParseError(fmt::format("{}: prefix '{}' needs {} scores", what, key, row_size));
    std::vector<double> row;
    for (const auto &v : val) {
      if (v.is_number()) {
        row.push_back(v.get<double>());
      } else if (v.is_null() || (v.is_string() && v.get<std::string>() == "-inf")) {
        row.push_back(-std::numeric_limits<double>::infinity());
      } else {
        throw ParseError(fmt::format("{}: non-numeric score under '{}'", what, key));
      }
    }
    table.emplace(key, std::move(row));
  }
  return table;
}

nlohmann::json read_json(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

double log_normalize(std::vector<double> &log_probs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : log_probs) mx = std::max(mx, v);
  if (!std::isfinite(mx)) throw NumericError("cannot normalize a distribution with no mass");
  double acc = 0.0;
  for (double v : log_probs) acc += std::exp(v - mx);
  double z = mx + std::log(acc);
  for (auto &v : log_probs) v -= z;
  return z;
}

std::unique_ptr<PrefixScorer> bind_context(std::shared_ptr<const ContextualScorer> scorer,
                                           std::vector<double> context) {
  return std::make_unique<BoundContextScorer>(std::move(scorer), std::move(context), false);
}

std::unique_ptr<PrefixScorer> zero_ilm_scorer(std::shared_ptr<const ContextualScorer> scorer) {
  std::vector<double> zeros(scorer->context_dim(), 0.0);
  return std::make_unique<BoundContextScorer>(std::move(scorer), std::move(zeros), true);
}

TablePrefixScorer::TablePrefixScorer(ScoreTable table, std::vector<std::string> label_names)
    : table_(std::move(table)), names_(std::move(label_names)) {
  for (const auto &[k, row] : table_)
    if (row.size() != names_.size() + 1)
      throw ValidationError(fmt::format("score row for '{}' has {} entries, expected {}", k,
                                        row.size(), names_.size() + 1));
}

TablePrefixScorer TablePrefixScorer::load(const std::filesystem::path &path,
                                          const LabelInventory &inv) {
  auto j = read_json(path);
  return TablePrefixScorer(parse_table(j, inv.size() + 1, path.string()), inv.labels());
}

std::string TablePrefixScorer::key(std::span<const int> prefix) const {
  std::string k;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (i) k += ' ';
    k += names_.at(static_cast<size_t>(prefix[i]));
  }
  return k;
}

std::vector<double> TablePrefixScorer::next_log_probs(std::span<const int> prefix) const {
  auto k = key(prefix);
  auto it = table_.find(k);
  if (it == table_.end()) throw Error("score table has no entry for prefix '" + k + "'");
  return it->second;
}

TableContextualScorer::TableContextualScorer(ScoreTable context_table, ScoreTable zero_table,
                                             std::vector<std::string> label_names,
                                             size_t context_dim)
    : context_(std::move(context_table), label_names),
      zero_(std::move(zero_table), label_names),
      dim_(context_dim) {
  if (dim_ == 0) throw ValidationError("context dimension must be positive");
}

TableContextualScorer TableContextualScorer::load(const std::filesystem::path &path,
                                                  const LabelInventory &inv) {
  auto j = read_json(path);
  if (!j.is_object() || !j.contains("context") || !j.contains("zero_context"))
    throw ParseError(path.string() + ": expected 'context' and 'zero_context' tables");
  size_t dim = j.value("context_dim", size_t{1});
  return TableContextualScorer(parse_table(j["context"], inv.size() + 1, path.string()),
                               parse_table(j["zero_context"], inv.size() + 1, path.string()),
                               inv.labels(), dim);
}

std::vector<double> TableContextualScorer::next_log_probs(std::span<const int> prefix,
                                                          std::span<const double> context) const {
  bool zero = std::all_of(context.begin(), context.end(), [](double v) { return v == 0.0; });
  return zero ? zero_.next_log_probs(prefix) : context_.next_log_probs(prefix);
}

}  // namespace sdtk
