// core/include/sdtk/lexicon.hpp

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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sdtk {

inline constexpr char kEowMarker = '#';

using Pronunciation = std::vector<std::string>;

bool has_eow_marker(std::string_view phone);
std::string strip_eow_marker(std::string_view phone);

/// Word -> pronunciations, one `word<TAB>phone phone ... phone#` per line.
/// Repeated words add pronunciation variants in file order.
class Lexicon {
 public:
  Lexicon() = default;

  void add(const std::string &word, Pronunciation pron);

  /// Pronunciations for `word`, trying an exact match first and then the
  /// lowercased spelling. Returns nullptr when absent.
  const std::vector<Pronunciation> *find(const std::string &word) const;
  bool contains(const std::string &word) const { return find(word) != nullptr; }

  /// True when word-final phones carry the '#' marker.
  bool eow_marking() const { return eow_marking_; }
  const std::vector<std::string> &words() const { return order_; }
  size_t size() const { return order_.size(); }

  /// Checks the end-of-word invariant: with marking on, exactly the final
  /// phone of each pronunciation carries '#'; with marking off, none do.
  void validate() const;

 private:
  std::map<std::string, std::vector<Pronunciation>> entries_;
  std::vector<std::string> order_;
  bool eow_marking_ = false;
};

Lexicon parse_lexicon(std::istream &is, const std::string &what = "<stream>");
Lexicon load_lexicon(const std::filesystem::path &path);
void write_lexicon(std::ostream &os, const Lexicon &lex);

std::vector<std::string> split_words(std::string_view text);

}  // namespace sdtk
