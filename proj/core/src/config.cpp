// core/src/config.cpp

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

#include "sdtk/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "sdtk/error.hpp"

namespace sdtk {

namespace {

namespace fs = std::filesystem;

void check_keys(const YAML::Node &node, const std::string &path,
                std::initializer_list<const char *> allowed) {
  if (!node.IsMap())
    throw ValidationError(fmt::format("{}: expected a mapping", path.empty() ? "<root>" : path));
  for (const auto &kv : node) {
    auto key = kv.first.as<std::string>();
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char *a) { return key == a; });
    if (!known)
      throw ValidationError(fmt::format("unknown key '{}'", path.empty() ? key : path + "." + key));
  }
}

template <typename T>
const char *type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

template <typename T>
void read(const YAML::Node &section, const std::string &path, const char *key, T &out) {
  const YAML::Node n = section[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception &) {
    throw ValidationError(fmt::format("{}.{}: expected {}", path, key, type_name<T>()));
  }
}

void set_path(YAML::Node node, const std::vector<std::string> &keys, size_t i,
              const YAML::Node &value) {
  if (i + 1 == keys.size()) {
    node[keys[i]] = value;
    return;
  }
  YAML::Node child = node[keys[i]];
  set_path(child, keys, i + 1, value);
}

fs::path resolve(const fs::path &p, const fs::path &base) {
  if (p.empty() || p.is_absolute()) return p.lexically_normal();
  return (base / p).lexically_normal();
}

void parse_into(const YAML::Node &root, const fs::path &base_dir, PipelineConfig &cfg) {
  if (!root || root.IsNull()) throw ValidationError("config is empty");
  check_keys(root, "", {"paths", "features", "train", "trim", "metrics", "decoder",
                        "silence_phone", "seed", "jobs"});

  if (const YAML::Node p = root["paths"]) {
    check_keys(p, "paths", {"manifest", "lexicon", "run_dir", "hypotheses"});
    auto path_of = [&](const char *key, fs::path &out) {
      std::string s;
      read(p, "paths", key, s);
      if (!s.empty()) out = resolve(s, base_dir);
    };
    path_of("manifest", cfg.paths.manifest);
    path_of("lexicon", cfg.paths.lexicon);
    path_of("run_dir", cfg.paths.run_dir);
    fs::path hyp;
    path_of("hypotheses", hyp);
    if (!hyp.empty()) cfg.paths.hypotheses = hyp;
  }
  if (const YAML::Node f = root["features"]) {
    check_keys(f, "features", {"window_length", "frame_shift", "num_mel_filters", "num_cepstra",
                               "preemphasis", "include_energy", "delta_orders", "delta_context",
                               "log_floor", "mean_variance_normalize"});
    auto &c = cfg.features;
    read(f, "features", "window_length", c.window_length);
    read(f, "features", "frame_shift", c.frame_shift);
    read(f, "features", "num_mel_filters", c.num_mel_filters);
    read(f, "features", "num_cepstra", c.num_cepstra);
    read(f, "features", "preemphasis", c.preemphasis);
    read(f, "features", "include_energy", c.include_energy);
    read(f, "features", "delta_orders", c.delta_orders);
    read(f, "features", "delta_context", c.delta_context);
    read(f, "features", "log_floor", c.log_floor);
    read(f, "features", "mean_variance_normalize", c.mean_variance_normalize);
  }
  if (const YAML::Node t = root["train"]) {
    check_keys(t, "train", {"align_iters", "split_iters", "phone_states", "silence_states",
                            "loop_prob", "variance_floor", "split_threshold",
                            "split_perturbation"});
    auto &c = cfg.train;
    read(t, "train", "align_iters", c.align_iters);
    read(t, "train", "split_iters", c.split_iters);
    read(t, "train", "phone_states", c.model.phone_states);
    read(t, "train", "silence_states", c.model.silence_states);
    read(t, "train", "loop_prob", c.model.loop_prob);
    read(t, "train", "variance_floor", c.model.variance_floor);
    read(t, "train", "split_threshold", c.model.split_threshold);
    read(t, "train", "split_perturbation", c.model.split_perturbation);
  }
  if (const YAML::Node t = root["trim"]) {
    check_keys(t, "trim", {"method", "delta_t", "min_region", "remove_boundary_silence",
                           "threshold_db", "min_duration", "frame_length"});
    auto &c = cfg.trim;
    std::string method;
    read(t, "trim", "method", method);
    if (!method.empty()) {
      try {
        c.method = parse_silence_method(method);
      } catch (const ValidationError &) {
        throw ValidationError(fmt::format("trim.method: unknown method '{}'", method));
      }
    }
    read(t, "trim", "delta_t", c.policy.delta_t);
    read(t, "trim", "min_region", c.policy.min_region);
    read(t, "trim", "remove_boundary_silence", c.policy.remove_boundary_silence);
    read(t, "trim", "threshold_db", c.threshold.threshold_db);
    read(t, "trim", "min_duration", c.threshold.min_duration);
    read(t, "trim", "frame_length", c.threshold.frame_length);
  }
  if (const YAML::Node m = root["metrics"]) {
    check_keys(m, "metrics", {"udr_threshold"});
    read(m, "metrics", "udr_threshold", cfg.metrics.unaligned_threshold);
  }
  if (const YAML::Node d = root["decoder"]) {
    check_keys(d, "decoder", {"lambda_lm", "lambda_ilm", "word_insertion_penalty", "beam_size",
                              "length_normalize"});
    auto &c = cfg.decoder;
    read(d, "decoder", "lambda_lm", c.lambda_lm);
    read(d, "decoder", "lambda_ilm", c.lambda_ilm);
    read(d, "decoder", "word_insertion_penalty", c.word_insertion_penalty);
    read(d, "decoder", "beam_size", c.beam_size);
    read(d, "decoder", "length_normalize", c.length_normalize);
  }
  read(root, "<root>", "silence_phone", cfg.silence_phone);
  read(root, "<root>", "seed", cfg.seed);
  read(root, "<root>", "jobs", cfg.jobs);
}

}  // namespace

void PipelineConfig::validate() const {
  if (paths.manifest.empty()) throw ValidationError("paths.manifest is required");
  if (paths.lexicon.empty()) throw ValidationError("paths.lexicon is required");
  if (paths.run_dir.empty()) throw ValidationError("paths.run_dir is required");
  features.validate();
  train.validate();
  trim.policy.validate();
  trim.threshold.validate();
  metrics.validate();
  try {
    decoder.validate();
  } catch (const ValidationError &e) {
    throw ValidationError(std::string("decoder.") + e.what());
  }
  if (silence_phone.empty() || has_eow_marker(silence_phone))
    throw ValidationError("silence_phone must be a non-empty phone name without '#'");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
}

PipelineConfig parse_config(std::string_view yaml, const fs::path &base_dir,
                            std::span<const std::string> overrides, const std::string &what) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto &ov : overrides) {
      auto eq = ov.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ValidationError(fmt::format("override '{}' is not key=value", ov));
      std::vector<std::string> keys;
      std::stringstream ss(ov.substr(0, eq));
      for (std::string k; std::getline(ss, k, '.');) keys.push_back(k);
      set_path(root, keys, 0, YAML::Load(ov.substr(eq + 1)));
    }
  } catch (const YAML::Exception &e) {
    throw ParseError(fmt::format("{}:{}: {}", what, e.mark.line + 1, e.msg));
  }
  PipelineConfig cfg;
  parse_into(root, base_dir, cfg);
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const fs::path &path, std::span<const std::string> overrides) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.parent_path(), overrides, path.string());
}

PipelineConfig default_config(const fs::path &manifest, const fs::path &lexicon,
                              const fs::path &run_dir) {
  PipelineConfig cfg;
  cfg.paths.manifest = manifest.lexically_normal();
  cfg.paths.lexicon = lexicon.lexically_normal();
  cfg.paths.run_dir = run_dir.lexically_normal();
  return cfg;
}

std::string canonical_json(const PipelineConfig &cfg) {
  nlohmann::json j;
  j["paths"] = {{"manifest", cfg.paths.manifest.string()},
                {"lexicon", cfg.paths.lexicon.string()},
                {"run_dir", cfg.paths.run_dir.string()},
                {"hypotheses", cfg.paths.hypotheses ? nlohmann::json(cfg.paths.hypotheses->string())
                                                    : nlohmann::json(nullptr)}};
  const auto &f = cfg.features;
  j["features"] = {{"window_length", f.window_length},
                   {"frame_shift", f.frame_shift},
                   {"num_mel_filters", f.num_mel_filters},
                   {"num_cepstra", f.num_cepstra},
                   {"preemphasis", f.preemphasis},
                   {"include_energy", f.include_energy},
                   {"delta_orders", f.delta_orders},
                   {"delta_context", f.delta_context},
                   {"log_floor", f.log_floor},
                   {"mean_variance_normalize", f.mean_variance_normalize}};
  const auto &t = cfg.train;
  j["train"] = {{"align_iters", t.align_iters},
                {"split_iters", t.split_iters},
                {"phone_states", t.model.phone_states},
                {"silence_states", t.model.silence_states},
                {"loop_prob", t.model.loop_prob},
                {"variance_floor", t.model.variance_floor},
                {"split_threshold", t.model.split_threshold},
                {"split_perturbation", t.model.split_perturbation}};
  const auto &r = cfg.trim;
  j["trim"] = {{"method", to_string(r.method)},
               {"delta_t", r.policy.delta_t},
               {"min_region", r.policy.min_region},
               {"remove_boundary_silence", r.policy.remove_boundary_silence},
               {"threshold_db", r.threshold.threshold_db},
               {"min_duration", r.threshold.min_duration},
               {"frame_length", r.threshold.frame_length}};
  j["metrics"] = {{"udr_threshold", cfg.metrics.unaligned_threshold}};
  const auto &d = cfg.decoder;
  j["decoder"] = {{"lambda_lm", d.lambda_lm},
                  {"lambda_ilm", d.lambda_ilm},
                  {"word_insertion_penalty", d.word_insertion_penalty},
                  {"beam_size", d.beam_size},
                  {"length_normalize", d.length_normalize}};
  j["silence_phone"] = cfg.silence_phone;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  return j.dump(2);
}

std::string config_hash(const PipelineConfig &cfg) { return sha256_hex(canonical_json(cfg)); }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace sdtk
