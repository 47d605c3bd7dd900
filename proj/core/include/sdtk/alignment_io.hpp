// core/include/sdtk/alignment_io.hpp

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
#include <string>
#include <vector>

#include "sdtk/gmm_hmm.hpp"

namespace sdtk {

// CTM-like text, one line per run of identical (phone, state) labels:
//
//   ;; sdtk-alignment frame_shift=0.01 silence=sil duration=3.2 score=-1234.5
//   utt_id start_sec dur_sec phone state_idx
//
// The header is optional on read; `default_shift` and `default_silence`
// apply when it is missing.
void write_alignment(std::ostream &os, const Alignment &ali);
Alignment read_alignment(std::istream &is, const std::string &what = "<stream>",
                         double default_shift = 0.010,
                         const std::string &default_silence = "sil");

/// One `<utt_id>.ctm` file per alignment.
void write_alignment_dir(const std::filesystem::path &dir, const std::vector<Alignment> &alis);
/// Reads every *.ctm file in `dir`, ordered by file name.
std::vector<Alignment> read_alignment_dir(const std::filesystem::path &dir,
                                          double default_shift = 0.010,
                                          const std::string &default_silence = "sil");

}  // namespace sdtk
