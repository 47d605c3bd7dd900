// core/src/lexicon.cpp

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

#include "sdtk/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sdtk/error.hpp"

namespace sdtk {

bool has_eow_marker(std::string_view phone) {
  return phone.size() > 1 && phone.back() == kEowMarker;
}

std::string strip_eow_marker(std::string_view phone) {
  if (has_eow_marker(phone)) phone.remove_suffix(1);
  return std::string(phone);
}

void Lexicon::add(const std::string &word, Pronunciation pron) {
  if (pron.empty()) throw ValidationError("empty pronunciation for '" + word + "'");
  if (std::any_of(pron.begin(), pron.end(), [](const auto &p) { return has_eow_marker(p); }))
    eow_marking_ = true;
  auto [it, inserted] = entries_.try_emplace(word);
  if (inserted) order_.push_back(word);
  it->second.push_back(std::move(pron));
}

const std::vector<Pronunciation> *Lexicon::find(const std::string &word) const {
  auto it = entries_.find(word);
  if (it != entries_.end()) return &it->second;
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  it = entries_.find(lower);
  return it == entries_.end() ? nullptr : &it->second;
}

void Lexicon::validate() const {
  for (const auto &[word, prons] : entries_) {
    for (const auto &pron : prons) {
      for (size_t i = 0; i < pron.size(); ++i) {
        bool marked = has_eow_marker(pron[i]);
        bool should = eow_marking_ && i + 1 == pron.size();
        if (marked != should)
          throw ValidationError(fmt::format(
              "lexicon entry '{}': phone '{}' at position {} {} the end-of-word marker", word,
              pron[i], i, marked ? "must not carry" : "must carry"));
      }
    }
  }
}

Lexicon parse_lexicon(std::istream &is, const std::string &what) {
  Lexicon lex;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(fmt::format("{}:{}: expected 'word<TAB>phones'", what, lineno));
    std::string word = line.substr(0, tab);
    Pronunciation pron;
    std::istringstream ps(line.substr(tab + 1));
    for (std::string p; ps >> p;) pron.push_back(p);
    if (word.empty() || pron.empty())
      throw ParseError(fmt::format("{}:{}: empty word or pronunciation", what, lineno));
    lex.add(word, std::move(pron));
  }
  lex.validate();
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return parse_lexicon(is, path.string());
}

void write_lexicon(std::ostream &os, const Lexicon &lex) {
  for (const auto &word : lex.words()) {
    for (const auto &pron : *lex.find(word)) {
      os << word << '\t';
      for (size_t i = 0; i < pron.size(); ++i) os << (i ? " " : "") << pron[i];
      os << '\n';
    }
  }
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(text)};
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

}  // namespace sdtk
