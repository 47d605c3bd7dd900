// core/src/alignment_io.cpp

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

#include "sdtk/alignment_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sdtk/error.hpp"

namespace sdtk {

void write_alignment(std::ostream &os, const Alignment &ali) {
  os << fmt::format(";; sdtk-alignment frame_shift={:.17g} silence={} duration={:.17g} score={:.17g}\n",
                    ali.frame_shift, ali.silence_phone, ali.audio_duration, ali.score);
  size_t t = 0;
  while (t < ali.frames.size()) {
    size_t end = t + 1;
    while (end < ali.frames.size() && ali.frames[end] == ali.frames[t]) ++end;
    os << fmt::format("{} {:.6f} {:.6f} {} {}\n", ali.utterance_id, t * ali.frame_shift,
                      (end - t) * ali.frame_shift, ali.frames[t].phone, ali.frames[t].state);
    t = end;
  }
}

Alignment read_alignment(std::istream &is, const std::string &what, double default_shift,
                         const std::string &default_silence) {
  Alignment ali;
  ali.frame_shift = default_shift;
  ali.silence_phone = default_silence;
  std::string line;
  size_t lineno = 0;
  bool have_id = false;
  while (std::getline(is, line)) {
    ++lineno;
    auto where = [&] { return fmt::format("{}:{}", what, lineno); };
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.rfind(";;", 0) == 0) {
      std::istringstream hs(line.substr(2));
      for (std::string tok; hs >> tok;) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
          if (key == "frame_shift") ali.frame_shift = std::stod(val);
          else if (key == "silence") ali.silence_phone = val;
          else if (key == "duration") ali.audio_duration = std::stod(val);
          else if (key == "score") ali.score = std::stod(val);
        } catch (const std::exception &) {
          throw ParseError(where() + ": bad header value for '" + key + "'");
        }
      }
      if (!(ali.frame_shift > 0)) throw ParseError(where() + ": frame_shift must be positive");
      continue;
    }
    std::istringstream ls(line);
    std::string utt, phone;
    double start = 0, dur = 0;
    int state = 0;
    if (!(ls >> utt >> start >> dur >> phone >> state))
      throw ParseError(where() + ": expected 'utt start dur phone state'");
    if (have_id && utt != ali.utterance_id)
      throw ParseError(where() + ": mixed utterance ids in one alignment");
    ali.utterance_id = utt;
    have_id = true;
    auto first = std::llround(start / ali.frame_shift);
    auto count = std::llround(dur / ali.frame_shift);
    if (first != static_cast<long long>(ali.frames.size()) || count <= 0)
      throw ParseError(where() + ": segment not contiguous with the previous one");
    ali.frames.insert(ali.frames.end(), static_cast<size_t>(count), FrameLabel{phone, state});
  }
  if (!have_id) throw ParseError(what + ": no segments");
  return ali;
}

void write_alignment_dir(const std::filesystem::path &dir, const std::vector<Alignment> &alis) {
  std::filesystem::create_directories(dir);
  for (const auto &a : alis) {
    std::ofstream os(dir / (a.utterance_id + ".ctm"));
    if (!os) throw IoError("cannot create alignment for " + a.utterance_id);
    write_alignment(os, a);
  }
}

std::vector<Alignment> read_alignment_dir(const std::filesystem::path &dir, double default_shift,
                                          const std::string &default_silence) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto &e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ctm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Alignment> out;
  for (const auto &f : files) {
    std::ifstream is(f);
    if (!is) throw IoError("cannot open " + f.string());
    out.push_back(read_alignment(is, f.string(), default_shift, default_silence));
  }
  return out;
}

}  // namespace sdtk
