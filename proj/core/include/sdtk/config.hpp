// core/include/sdtk/config.hpp

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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sdtk/decoder.hpp"
#include "sdtk/features.hpp"
#include "sdtk/gmm_hmm.hpp"
#include "sdtk/metrics.hpp"
#include "sdtk/silence.hpp"

namespace sdtk {

struct PathsConfig {
  std::filesystem::path manifest;
  std::filesystem::path lexicon;
  std::filesystem::path run_dir;
  // JSON-lines {id, text} recognizer output; scored for WDR when present.
  std::optional<std::filesystem::path> hypotheses;
};

struct TrimConfig {
  SilenceMethod method = SilenceMethod::kAlignment;
  TrimPolicy policy;
  ThresholdParams threshold;
};

/// Everything a pipeline run depends on. Read from YAML; the sections
/// mirror the member names (paths, features, train, trim, metrics,
/// decoder) plus the top-level scalars silence_phone, seed and jobs.
struct PipelineConfig {
  PathsConfig paths;
  FeatureConfig features;
  TrainSchedule train;
  TrimConfig trim;
  UdrConfig metrics;
  FusionWeights decoder;
  std::string silence_phone = "sil";
  uint64_t seed = 1234;
  int jobs = 1;

  /// Throws ValidationError naming the key path of the first bad value.
  void validate() const;
};

/// Parses YAML text. Relative paths resolve against `base_dir`. Unknown
/// keys are rejected. Each override is `section.key=value`, applied before
/// defaulting and validation.
PipelineConfig parse_config(std::string_view yaml, const std::filesystem::path &base_dir,
                            std::span<const std::string> overrides = {},
                            const std::string &what = "<config>");
PipelineConfig load_config(const std::filesystem::path &path,
                           std::span<const std::string> overrides = {});

/// Defaults only, with the required paths filled in.
PipelineConfig default_config(const std::filesystem::path &manifest,
                              const std::filesystem::path &lexicon,
                              const std::filesystem::path &run_dir);

/// Fully resolved config as JSON with sorted keys, so equal configs give
/// equal text.
std::string canonical_json(const PipelineConfig &cfg);

/// Hex SHA-256 of canonical_json(cfg).
std::string config_hash(const PipelineConfig &cfg);

std::string sha256_hex(std::string_view data);

}  // namespace sdtk
