// core/include/sdtk/gmm_hmm.hpp

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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdtk/features.hpp"
#include "sdtk/lexicon.hpp"

namespace sdtk {

/// Ordered phone inventory with one distinguished silence phone.
class PhoneSet {
 public:
  PhoneSet() = default;
  PhoneSet(std::vector<std::string> phones, std::string silence);

  /// Sorted unique phones of the lexicon (markers stripped) plus `silence`.
  static PhoneSet from_lexicon(const Lexicon &lex, const std::string &silence);

  int index(const std::string &phone) const;  // throws ValidationError if unknown
  bool contains(const std::string &phone) const;
  const std::string &name(int idx) const { return phones_[static_cast<size_t>(idx)]; }
  size_t size() const { return phones_.size(); }
  const std::vector<std::string> &phones() const { return phones_; }
  const std::string &silence() const { return silence_; }
  int silence_index() const { return silence_index_; }

  bool operator==(const PhoneSet &) const = default;

 private:
  std::vector<std::string> phones_;
  std::string silence_;
  int silence_index_ = -1;
};

/// Diagonal-covariance Gaussian mixture.
struct DiagGmm {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> variances;

  size_t num_components() const { return weights.size(); }
  size_t dim() const { return means.empty() ? 0 : means.front().size(); }

  /// log(w_k) + log N(x; mu_k, var_k) for every component.
  void component_log_likelihoods(std::span<const float> x, std::vector<double> &out) const;
  double log_likelihood(std::span<const float> x) const;

  bool operator==(const DiagGmm &) const = default;
};

struct HmmState {
  DiagGmm gmm;
  double loop_prob = 0.5;

  double forward_prob() const { return 1.0 - loop_prob; }
  bool operator==(const HmmState &) const = default;
};

/// Numerical knobs for the monophone model. Transition probabilities are
/// fixed at construction and never re-estimated.
struct GmmHmmConfig {
  int phone_states = 3;
  int silence_states = 1;
  double loop_prob = 0.5;
  double variance_floor = 1e-4;
  double split_threshold = 0.02;
  double split_perturbation = 0.1;

  void validate() const;
  bool operator==(const GmmHmmConfig &) const = default;
};

/// Monophone left-to-right HMM with diagonal GMM emissions. States of all
/// phones are stored contiguously; state_id(phone, k) indexes them.
class GmmHmmModel {
 public:
  GmmHmmModel() = default;
  /// Every state starts as a single standard-normal component.
  GmmHmmModel(PhoneSet phones, size_t feature_dim, GmmHmmConfig cfg = {});

  const PhoneSet &phones() const { return phones_; }
  const GmmHmmConfig &config() const { return cfg_; }
  size_t feature_dim() const { return feature_dim_; }

  int states_for_phone(int phone) const;
  size_t state_id(int phone, int state) const;
  size_t num_states() const { return states_.size(); }
  const HmmState &state(size_t id) const { return states_[id]; }
  HmmState &state(size_t id) { return states_[id]; }
  size_t max_components() const;

  /// Throws ValidationError if weights, variances or transitions are off.
  void validate() const;

  bool operator==(const GmmHmmModel &) const = default;

 private:
  PhoneSet phones_;
  GmmHmmConfig cfg_;
  size_t feature_dim_ = 0;
  std::vector<size_t> phone_offset_;
  std::vector<HmmState> states_;
};

// Binary model file: "SPGM", u32 version, config, phone table, then per
// state the loop probability and GMM parameters. Little-endian f64 values.
void write_model(std::ostream &os, const GmmHmmModel &model);
void write_model(const std::filesystem::path &path, const GmmHmmModel &model);
GmmHmmModel read_model(std::istream &is, const std::string &what = "<stream>");
GmmHmmModel read_model(const std::filesystem::path &path);

struct GraphNode {
  int phone = 0;         // index into the PhoneSet
  int state = 0;         // emitting state within the phone
  bool optional = false; // may be skipped entirely
  bool operator==(const GraphNode &) const = default;
};

/// Linear state sequence for forced alignment. A path starts in the first
/// node (or the second when the first is optional), ends in the last (or
/// the one before when the last is optional), and at every frame either
/// stays, moves to the next node, or skips over one optional node.
struct StateGraph {
  std::vector<GraphNode> nodes;

  size_t min_frames() const;
  size_t size() const { return nodes.size(); }
};

/// Phone-state chain of the first pronunciation of every word, with a
/// mandatory silence at both ends and, if `optional_silence`, a skippable
/// silence between consecutive words. Throws OovError.
StateGraph build_state_graph(std::span<const std::string> words, const Lexicon &lex,
                             const PhoneSet &phones, const GmmHmmConfig &topo = {},
                             bool optional_silence = true);

struct FrameLabel {
  std::string phone;
  int state = 0;
  bool operator==(const FrameLabel &) const = default;
};

struct Alignment {
  std::string utterance_id;
  std::vector<FrameLabel> frames;
  double frame_shift = 0.010;
  double score = 0.0;
  std::string silence_phone = "sil";
  // Source audio duration in seconds; 0 when unknown.
  double audio_duration = 0.0;
  // Graph node per frame, when produced by the aligner (not serialized).
  std::vector<size_t> node_path;

  size_t num_frames() const { return frames.size(); }
  bool is_silence(size_t t) const { return frames[t].phone == silence_phone; }
  double total_duration() const {
    return audio_duration > 0 ? audio_duration : frames.size() * frame_shift;
  }
};

/// Frames per state when T frames are split evenly over `num_states`:
/// state i covers [floor(i*T/S), floor((i+1)*T/S)). Throws
/// InfeasibleAlignmentError when T < S.
std::vector<size_t> linear_durations(size_t num_frames, size_t num_states);

/// Linear alignment over the graph's mandatory nodes.
Alignment linear_alignment(size_t num_frames, const StateGraph &graph, const PhoneSet &phones);

/// Best monotone path through `graph`. Alignment::score is the sum of the
/// emission log-likelihoods and transition log-probabilities on the path.
Alignment viterbi_align(const FeatureMatrix &feats, const GmmHmmModel &model,
                        const StateGraph &graph);

/// True when the alignment's label sequence is a legal expansion of the graph.
bool is_legal_expansion(const Alignment &ali, const StateGraph &graph, const PhoneSet &phones);

struct AlignedUtterance {
  const FeatureMatrix *features = nullptr;
  const Alignment *alignment = nullptr;
};

/// One hard-EM step. Frames are assigned to states by the alignments;
/// within a state, component responsibilities come from the current GMM.
/// States without frames keep their parameters.
GmmHmmModel accumulate_and_update(const GmmHmmModel &model,
                                  std::span<const AlignedUtterance> data);

/// Splits every component whose weight is at least split_threshold into
/// two children at mu -/+ split_perturbation * sigma.
GmmHmmModel split_mixtures(const GmmHmmModel &model);

/// Single-component model with every state set to the global mean and
/// (floored) variance of all frames.
GmmHmmModel flat_start_model(const PhoneSet &phones, std::span<const FeatureMatrix> feats,
                             const GmmHmmConfig &cfg = {});

struct TrainSchedule {
  int align_iters = 75;
  int split_iters = 10;
  GmmHmmConfig model;

  void validate() const;
  bool operator==(const TrainSchedule &) const = default;
};

struct TrainUtterance {
  std::string id;
  FeatureMatrix features;
  std::vector<std::string> words;
};

struct TrainResult {
  GmmHmmModel model;
  // Parallel to the input utterances; nullopt for skipped ones.
  std::vector<std::optional<Alignment>> alignments;
  // Total corpus Viterbi score after each alignment pass.
  std::vector<double> align_scores;
  std::vector<double> split_scores;
  std::vector<std::string> skipped;
};

/// Starting from a flat-start model and linear alignments, runs
/// `align_iters` rounds of (update from current alignments, realign), then
/// `split_iters` rounds of (split, realign, update), then a final alignment
/// pass. With align_iters=1 and split_iters=0 the returned model is the
/// flat start updated once from the linear alignments.
TrainResult train(std::span<const TrainUtterance> corpus, const Lexicon &lex,
                  const PhoneSet &phones, const TrainSchedule &schedule, int jobs = 1);

}  // namespace sdtk
