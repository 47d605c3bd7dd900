// core/src/ngram_lm.cpp

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

#include "sdtk/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sdtk/error.hpp"

namespace sdtk {

namespace {

bool parse_double(const std::string &s, double *out) {
  const char *begin = s.c_str();
  char *end = nullptr;
  *out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

std::vector<std::string> tokenize(const std::string &line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  for (std::string t; ss >> t;) toks.push_back(t);
  return toks;
}

std::string trim(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

size_t NGramLM::KeyHash::operator()(const std::vector<int> &key) const noexcept {
  size_t h = 1469598103934665603ull;
  for (int v : key) {
    h ^= static_cast<size_t>(static_cast<unsigned>(v));
    h *= 1099511628211ull;
  }
  return h;
}

int NGramLM::word_id(const std::string &word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kNoWord : it->second;
}

const NGramLM::Entry *NGramLM::lookup(std::span<const int> ngram) const {
  if (ngram.empty() || ngram.size() > tables_.size()) return nullptr;
  const auto &table = tables_[ngram.size() - 1];
  auto it = table.find(std::vector<int>(ngram.begin(), ngram.end()));
  return it == table.end() ? nullptr : &it->second;
}

bool NGramLM::find(std::span<const int> ngram, double *log10_prob, double *backoff) const {
  const Entry *e = lookup(ngram);
  if (!e) return false;
  if (log10_prob) *log10_prob = e->log10_prob;
  if (backoff) *backoff = e->backoff;
  return true;
}

LmState NGramLM::begin_state() const {
  LmState s;
  if (bos_ != kNoWord && order() > 1) s.history.push_back(bos_);
  return s;
}

std::pair<double, LmState> NGramLM::score_id(const LmState &state, int id) const {
  if (id == kNoWord) {
    if (unk_ == kNoWord) return {oov_floor_, LmState{}};
    id = unk_;
  }
  const size_t max_hist = static_cast<size_t>(order() - 1);
  std::span<const int> hist(state.history);
  if (hist.size() > max_hist) hist = hist.last(max_hist);

  double score = 0.0;
  std::vector<int> key;
  for (size_t k = hist.size() + 1; k-- > 0;) {
    auto ctx = hist.last(k);
    key.assign(ctx.begin(), ctx.end());
    key.push_back(id);
    if (const Entry *e = lookup(key)) {
      score += e->log10_prob;
      break;
    }
    if (k == 0) {
      // only reachable for words without a unigram, which parse_arpa rules out
      score = oov_floor_;
      break;
    }
    if (const Entry *c = lookup(ctx)) score += c->backoff;
  }

  std::vector<int> full(hist.begin(), hist.end());
  full.push_back(id);
  LmState next;
  for (size_t len = std::min(max_hist, full.size()); len > 0; --len) {
    std::span<const int> suffix = std::span<const int>(full).last(len);
    if (lookup(suffix)) {
      next.history.assign(suffix.begin(), suffix.end());
      break;
    }
  }
  return {score, next};
}

std::pair<double, LmState> NGramLM::score_word(const LmState &state,
                                               const std::string &word) const {
  return score_id(state, word_id(word));
}

double NGramLM::sentence_log10prob(std::span<const std::string> words) const {
  LmState s = begin_state();
  double total = 0.0;
  for (const auto &w : words) {
    auto [lp, next] = score_word(s, w);
    total += lp;
    s = std::move(next);
  }
  total += score_id(s, eos_).first;
  return total;
}

void NGramLM::write_arpa(std::ostream &os) const {
  os << "\n\\data\\\n";
  for (size_t n = 0; n < tables_.size(); ++n)
    os << "ngram " << n + 1 << "=" << tables_[n].size() << "\n";
  for (size_t n = 0; n < tables_.size(); ++n) {
    os << "\n\\" << n + 1 << "-grams:\n";
    std::vector<const Table::value_type *> rows;
    for (const auto &kv : tables_[n]) rows.push_back(&kv);
    std::sort(rows.begin(), rows.end(), [](auto *a, auto *b) { return a->first < b->first; });
    for (const auto *kv : rows) {
      os << fmt::format("{:.17g}\t", kv->second.log10_prob);
      for (size_t i = 0; i < kv->first.size(); ++i)
        os << (i ? " " : "") << vocab_[static_cast<size_t>(kv->first[i])];
      if (n + 1 < tables_.size()) os << fmt::format("\t{:.17g}", kv->second.backoff);
      os << "\n";
    }
  }
  os << "\n\\end\\\n";
}

NGramLM parse_arpa(std::istream &is, const std::string &what) {
  NGramLM lm;
  std::string raw;
  size_t lineno = 0;
  auto fail = [&](const std::string &msg) -> ParseError {
    return ParseError(fmt::format("{}:{}: {}", what, lineno, msg));
  };
  auto next_line = [&](std::string &line) -> bool {
    while (std::getline(is, raw)) {
      ++lineno;
      line = trim(raw);
      if (!line.empty()) return true;
    }
    return false;
  };

  std::string line;
  bool found = false;
  while (next_line(line)) {
    if (line == "\\data\\") {
      found = true;
      break;
    }
  }
  if (!found) throw fail("missing \\data\\ header");

  std::vector<size_t> declared;
  while (true) {
    if (!next_line(line)) throw fail("unexpected end of file in header");
    if (line.rfind("ngram ", 0) != 0) break;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw fail("malformed count line");
    double order = 0, count = 0;
    if (!parse_double(trim(line.substr(6, eq - 6)), &order) ||
        !parse_double(trim(line.substr(eq + 1)), &count) || count < 0)
      throw fail("malformed count line");
    if (static_cast<size_t>(order) != declared.size() + 1) throw fail("n-gram orders out of sequence");
    declared.push_back(static_cast<size_t>(count));
  }
  if (declared.empty()) throw fail("no n-gram counts in header");
  lm.tables_.resize(declared.size());

  // `line` now holds the first section marker.
  for (size_t n = 1; n <= declared.size(); ++n) {
    if (line != fmt::format("\\{}-grams:", n))
      throw fail(fmt::format("expected \\{}-grams: section", n));
    auto &table = lm.tables_[n - 1];
    bool more = false;
    while ((more = next_line(line))) {
      if (line[0] == '\\') break;
      auto toks = tokenize(line);
      if (toks.size() != n + 1 && toks.size() != n + 2)
        throw fail(fmt::format("expected {} or {} fields, found {}", n + 1, n + 2, toks.size()));
      double lp = 0, bo = 0;
      if (!parse_double(toks[0], &lp) || !std::isfinite(lp)) throw fail("bad log probability");
      if (toks.size() == n + 2 && (!parse_double(toks[n + 1], &bo) || !std::isfinite(bo)))
        throw fail("bad backoff weight");
      std::vector<int> key;
      for (size_t i = 1; i <= n; ++i) {
        const auto &w = toks[i];
        int id = lm.word_id(w);
        if (n == 1) {
          if (id != NGramLM::kNoWord) throw fail("duplicate unigram '" + w + "'");
          id = static_cast<int>(lm.vocab_.size());
          lm.vocab_.push_back(w);
          lm.ids_.emplace(w, id);
        } else if (id == NGramLM::kNoWord) {
          throw fail("word '" + w + "' has no unigram");
        }
        key.push_back(id);
      }
      if (n > 1 && !lm.lookup(std::span<const int>(key).first(n - 1)))
        throw fail("context of n-gram not stored at lower order");
      if (!table.emplace(std::move(key), NGramLM::Entry{lp, bo}).second)
        throw fail("duplicate n-gram");
    }
    if (table.size() != declared[n - 1])
      throw fail(fmt::format("header declares {} {}-grams, section has {}", declared[n - 1], n,
                             table.size()));
    if (!more) throw fail("missing \\end\\ marker");
  }
  if (line != "\\end\\") throw fail("expected \\end\\ marker, found '" + line + "'");

  lm.bos_ = lm.word_id("<s>");
  lm.eos_ = lm.word_id("</s>");
  lm.unk_ = lm.word_id("<unk>");
  if (lm.eos_ == NGramLM::kNoWord) throw ParseError(what + ": model has no </s> unigram");
  return lm;
}

NGramLM load_arpa(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return parse_arpa(is, path.string());
}

double perplexity(const NGramLM &lm, std::span<const std::vector<std::string>> sentences) {
  if (sentences.empty()) throw ValidationError("perplexity over an empty corpus");
  double total = 0.0;
  size_t tokens = 0;
  for (const auto &s : sentences) {
    total += lm.sentence_log10prob(s);
    tokens += s.size() + 1;
  }
  return std::pow(10.0, -total / static_cast<double>(tokens));
}

}  // namespace sdtk
