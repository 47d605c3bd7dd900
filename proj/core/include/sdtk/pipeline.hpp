// core/include/sdtk/pipeline.hpp

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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdtk/config.hpp"
#include "sdtk/metrics.hpp"

namespace sdtk {

enum class Stage { kFeatures, kTrain, kAlign, kTrim, kMetrics };

const char *to_string(Stage stage);
/// Accepts the stage names and the matching CLI subcommand names
/// (train-gmm, trim-silence).
Stage parse_stage(const std::string &name);
std::vector<Stage> all_stages();

struct StageReport {
  std::string name;
  double seconds = 0.0;
  size_t processed = 0;
  size_t skipped = 0;
};

struct RunReport {
  std::string config_hash;
  // SHA-256 over every artifact in the run directory except the report.
  std::string artifacts_hash;
  std::vector<StageReport> stages;
  std::optional<RatioMetric> udr;
  std::optional<RatioMetric> wdr;
  std::optional<double> trimmed_seconds;
};

// Run directory layout:
//   resolved_config.json
//   features/<id>.spfm
//   model.gmm, train_scores.json
//   alignments/<id>.ctm
//   trimmed/{audio/, manifest.jsonl, report.json, alignments/}
//   metrics/alignments/<id>.ctm, metrics.json
//   run_report.json
inline constexpr const char *kRunReportFile = "run_report.json";

/// Runs the requested stages in dependency order. A stage whose inputs
/// are missing from the run directory throws MissingArtifactError naming
/// the stage to run first.
RunReport run_pipeline(const PipelineConfig &cfg, std::span<const Stage> stages);

void write_run_report(const std::filesystem::path &path, const RunReport &report);

/// SHA-256 over (relative path, contents) of every regular file under
/// `dir` in path order, skipping files named in `exclude`.
std::string hash_directory(const std::filesystem::path &dir,
                           std::span<const std::string> exclude = {});

}  // namespace sdtk
