// core/src/gmm_hmm.cpp

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

#include "sdtk/gmm_hmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sdtk/binary_io.hpp"
#include "sdtk/error.hpp"
#include "sdtk/parallel.hpp"

namespace sdtk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr uint32_t kModelVersion = 1;

double log_sum_exp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

// Occupancy below this is treated as no data for a mixture component.
constexpr double kMinOccupancy = 1e-10;

}  // namespace

// ---------------------------------------------------------------------------
// PhoneSet

PhoneSet::PhoneSet(std::vector<std::string> phones, std::string silence)
    : phones_(std::move(phones)), silence_(std::move(silence)) {
  std::set<std::string> seen;
  for (size_t i = 0; i < phones_.size(); ++i) {
    if (phones_[i].empty()) throw ValidationError("empty phone symbol");
    if (!seen.insert(phones_[i]).second)
      throw ValidationError("duplicate phone symbol '" + phones_[i] + "'");
    if (phones_[i] == silence_) silence_index_ = static_cast<int>(i);
  }
  if (silence_index_ < 0)
    throw ValidationError("silence symbol '" + silence_ + "' not in phone set");
}

PhoneSet PhoneSet::from_lexicon(const Lexicon &lex, const std::string &silence) {
  std::set<std::string> all{silence};
  for (const auto &w : lex.words())
    for (const auto &pron : *lex.find(w))
      for (const auto &p : pron) all.insert(strip_eow_marker(p));
  return PhoneSet({all.begin(), all.end()}, silence);
}

int PhoneSet::index(const std::string &phone) const {
  auto it = std::find(phones_.begin(), phones_.end(), phone);
  if (it == phones_.end()) throw ValidationError("unknown phone '" + phone + "'");
  return static_cast<int>(it - phones_.begin());
}

bool PhoneSet::contains(const std::string &phone) const {
  return std::find(phones_.begin(), phones_.end(), phone) != phones_.end();
}

// ---------------------------------------------------------------------------
// DiagGmm

void DiagGmm::component_log_likelihoods(std::span<const float> x, std::vector<double> &out) const {
  static const double kLog2Pi = std::log(2.0 * std::numbers::pi);
  out.resize(weights.size());
  for (size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) {
      out[k] = kNegInf;
      continue;
    }
    const auto &mu = means[k];
    const auto &var = variances[k];
    double acc = 0.0;
    for (size_t d = 0; d < x.size(); ++d) {
      double diff = x[d] - mu[d];
      acc += kLog2Pi + std::log(var[d]) + diff * diff / var[d];
    }
    out[k] = std::log(weights[k]) - 0.5 * acc;
  }
}

double DiagGmm::log_likelihood(std::span<const float> x) const {
  thread_local std::vector<double> buf;
  component_log_likelihoods(x, buf);
  return log_sum_exp(buf);
}

// ---------------------------------------------------------------------------
// GmmHmmModel

void GmmHmmConfig::validate() const {
  auto fail = [](const std::string &m) { throw ValidationError("train." + m); };
  if (phone_states < 1) fail("phone_states must be >= 1");
  if (silence_states < 1) fail("silence_states must be >= 1");
  if (!(loop_prob > 0.0 && loop_prob < 1.0)) fail("loop_prob must be in (0, 1)");
  if (!(variance_floor > 0.0)) fail("variance_floor must be positive");
  if (!(split_threshold >= 0.0 && split_threshold <= 1.0)) fail("split_threshold must be in [0, 1]");
  if (!(split_perturbation > 0.0)) fail("split_perturbation must be positive");
}

GmmHmmModel::GmmHmmModel(PhoneSet phones, size_t feature_dim, GmmHmmConfig cfg)
    : phones_(std::move(phones)), cfg_(cfg), feature_dim_(feature_dim) {
  cfg_.validate();
  if (feature_dim_ == 0) throw ValidationError("feature dimension must be positive");
  size_t offset = 0;
  for (size_t p = 0; p < phones_.size(); ++p) {
    phone_offset_.push_back(offset);
    offset += static_cast<size_t>(states_for_phone(static_cast<int>(p)));
  }
  HmmState init;
  init.loop_prob = cfg_.loop_prob;
  init.gmm.weights = {1.0};
  init.gmm.means = {std::vector<double>(feature_dim_, 0.0)};
  init.gmm.variances = {std::vector<double>(feature_dim_, 1.0)};
  states_.assign(offset, init);
}

int GmmHmmModel::states_for_phone(int phone) const {
  return phone == phones_.silence_index() ? cfg_.silence_states : cfg_.phone_states;
}

size_t GmmHmmModel::state_id(int phone, int state) const {
  if (phone < 0 || static_cast<size_t>(phone) >= phones_.size() || state < 0 ||
      state >= states_for_phone(phone))
    throw ValidationError(fmt::format("no HMM state {} for phone index {}", state, phone));
  return phone_offset_[static_cast<size_t>(phone)] + static_cast<size_t>(state);
}

size_t GmmHmmModel::max_components() const {
  size_t m = 0;
  for (const auto &s : states_) m = std::max(m, s.gmm.num_components());
  return m;
}

void GmmHmmModel::validate() const {
  for (size_t i = 0; i < states_.size(); ++i) {
    const auto &s = states_[i];
    if (!(s.loop_prob > 0.0 && s.loop_prob < 1.0))
      throw ValidationError(fmt::format("state {}: loop probability out of range", i));
    const auto &g = s.gmm;
    if (g.num_components() == 0) throw ValidationError(fmt::format("state {}: empty GMM", i));
    double wsum = 0.0;
    for (size_t k = 0; k < g.num_components(); ++k) {
      wsum += g.weights[k];
      if (g.means[k].size() != feature_dim_ || g.variances[k].size() != feature_dim_)
        throw ValidationError(fmt::format("state {}: dimension mismatch", i));
      for (double v : g.variances[k])
        if (!(v >= cfg_.variance_floor))
          throw ValidationError(fmt::format("state {}: variance below floor", i));
    }
    if (std::abs(wsum - 1.0) > 1e-9)
      throw ValidationError(fmt::format("state {}: weights sum to {}", i, wsum));
  }
}

void write_model(std::ostream &os, const GmmHmmModel &model) {
  LeWriter wr(os);
  const auto &cfg = model.config();
  wr.bytes(std::span<const char>("SPGM", 4));
  wr.u32(kModelVersion);
  wr.u32(static_cast<uint32_t>(model.feature_dim()));
  wr.u32(static_cast<uint32_t>(cfg.phone_states));
  wr.u32(static_cast<uint32_t>(cfg.silence_states));
  wr.f64(cfg.loop_prob);
  wr.f64(cfg.variance_floor);
  wr.f64(cfg.split_threshold);
  wr.f64(cfg.split_perturbation);
  wr.u32(static_cast<uint32_t>(model.phones().size()));
  for (const auto &p : model.phones().phones()) wr.str(p);
  wr.str(model.phones().silence());
  wr.u32(static_cast<uint32_t>(model.num_states()));
  for (size_t i = 0; i < model.num_states(); ++i) {
    const auto &s = model.state(i);
    wr.f64(s.loop_prob);
    wr.u32(static_cast<uint32_t>(s.gmm.num_components()));
    for (size_t k = 0; k < s.gmm.num_components(); ++k) {
      wr.f64(s.gmm.weights[k]);
      for (double v : s.gmm.means[k]) wr.f64(v);
      for (double v : s.gmm.variances[k]) wr.f64(v);
    }
  }
  if (!os) throw IoError("failed writing model");
}

void write_model(const std::filesystem::path &path, const GmmHmmModel &model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create " + path.string());
  write_model(os, model);
}

GmmHmmModel read_model(std::istream &is, const std::string &what) {
  LeReader rd(is, what);
  char magic[4];
  rd.bytes(magic);
  if (std::string_view(magic, 4) != "SPGM") throw FormatError(what + ": bad magic, expected SPGM");
  uint32_t version = rd.u32();
  if (version != kModelVersion)
    throw FormatError(fmt::format("{}: unsupported model version {}", what, version));
  size_t dim = rd.u32();
  GmmHmmConfig cfg;
  cfg.phone_states = static_cast<int>(rd.u32());
  cfg.silence_states = static_cast<int>(rd.u32());
  cfg.loop_prob = rd.f64();
  cfg.variance_floor = rd.f64();
  cfg.split_threshold = rd.f64();
  cfg.split_perturbation = rd.f64();
  uint32_t nphones = rd.u32();
  std::vector<std::string> phones;
  for (uint32_t i = 0; i < nphones; ++i) phones.push_back(rd.str());
  std::string silence = rd.str();
  GmmHmmModel model(PhoneSet(std::move(phones), silence), dim, cfg);
  uint32_t nstates = rd.u32();
  if (nstates != model.num_states())
    throw ParseError(fmt::format("{}: {} states stored, topology implies {}", what, nstates,
                                 model.num_states()));
  for (size_t i = 0; i < nstates; ++i) {
    auto &s = model.state(i);
    s.loop_prob = rd.f64();
    uint32_t ncomp = rd.u32();
    if (ncomp == 0 || ncomp > (1u << 20)) throw ParseError(what + ": bad component count");
    s.gmm.weights.assign(ncomp, 0.0);
    s.gmm.means.assign(ncomp, std::vector<double>(dim));
    s.gmm.variances.assign(ncomp, std::vector<double>(dim));
    for (size_t k = 0; k < ncomp; ++k) {
      s.gmm.weights[k] = rd.f64();
      for (auto &v : s.gmm.means[k]) v = rd.f64();
      for (auto &v : s.gmm.variances[k]) v = rd.f64();
    }
  }
  model.validate();
  return model;
}

GmmHmmModel read_model(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_model(is, path.string());
}

// ---------------------------------------------------------------------------
// State graph and alignment

size_t StateGraph::min_frames() const {
  const size_t n = nodes.size();
  if (n == 0) return 0;
  constexpr size_t kInf = std::numeric_limits<size_t>::max() / 2;
  // dist[j]: fewest frames of a legal prefix path ending in node j
  std::vector<size_t> dist(n, kInf);
  dist[0] = 1;
  if (n > 1 && nodes[0].optional) dist[1] = 1;
  for (size_t j = 1; j < n; ++j) {
    dist[j] = std::min(dist[j], dist[j - 1] + 1);
    if (j >= 2 && nodes[j - 1].optional) dist[j] = std::min(dist[j], dist[j - 2] + 1);
  }
  size_t best = dist[n - 1];
  if (n > 1 && nodes[n - 1].optional) best = std::min(best, dist[n - 2]);
  return best;
}

StateGraph build_state_graph(std::span<const std::string> words, const Lexicon &lex,
                             const PhoneSet &phones, const GmmHmmConfig &topo,
                             bool optional_silence) {
  StateGraph g;
  const int sil = phones.silence_index();
  auto add_silence = [&](bool optional) {
    for (int s = 0; s < topo.silence_states; ++s) g.nodes.push_back({sil, s, optional});
  };
  add_silence(false);
  for (size_t w = 0; w < words.size(); ++w) {
    const auto *prons = lex.find(words[w]);
    if (!prons) throw OovError(words[w]);
    if (w > 0 && optional_silence) add_silence(true);
    for (const auto &p : prons->front()) {
      std::string base = strip_eow_marker(p);
      if (!phones.contains(base))
        throw ValidationError("phone '" + base + "' of word '" + words[w] + "' not in phone set");
      int idx = phones.index(base);
      int nstates = idx == sil ? topo.silence_states : topo.phone_states;
      for (int s = 0; s < nstates; ++s) g.nodes.push_back({idx, s, false});
    }
  }
  if (!words.empty()) add_silence(false);
  return g;
}

std::vector<size_t> linear_durations(size_t num_frames, size_t num_states) {
  if (num_states == 0) throw InfeasibleAlignmentError("linear alignment over zero states");
  if (num_frames < num_states)
    throw InfeasibleAlignmentError(
        fmt::format("{} frames cannot cover {} states", num_frames, num_states));
  std::vector<size_t> d(num_states);
  for (size_t i = 0; i < num_states; ++i)
    d[i] = (i + 1) * num_frames / num_states - i * num_frames / num_states;
  return d;
}

Alignment linear_alignment(size_t num_frames, const StateGraph &graph, const PhoneSet &phones) {
  std::vector<size_t> seq;
  for (size_t j = 0; j < graph.size(); ++j)
    if (!graph.nodes[j].optional) seq.push_back(j);
  auto durations = linear_durations(num_frames, seq.size());
  Alignment ali;
  ali.silence_phone = phones.silence();
  for (size_t i = 0; i < seq.size(); ++i) {
    const auto &node = graph.nodes[seq[i]];
    for (size_t k = 0; k < durations[i]; ++k) {
      ali.frames.push_back({phones.name(node.phone), node.state});
      ali.node_path.push_back(seq[i]);
    }
  }
  return ali;
}

Alignment viterbi_align(const FeatureMatrix &feats, const GmmHmmModel &model,
                        const StateGraph &graph) {
  const size_t T = feats.frames;
  const size_t N = graph.size();
  if (N == 0) throw InfeasibleAlignmentError("empty state graph");
  if (feats.dims != model.feature_dim())
    throw ValidationError(fmt::format("feature dimension {} does not match model dimension {}",
                                      feats.dims, model.feature_dim()));
  if (T < graph.min_frames())
    throw InfeasibleAlignmentError(
        fmt::format("{} frames, graph needs at least {}", T, graph.min_frames()));

  // Emissions are cached per distinct model state.
  std::vector<size_t> node_state(N);
  std::map<size_t, size_t> slot_of;
  std::vector<size_t> slot_state;
  for (size_t j = 0; j < N; ++j) {
    node_state[j] = model.state_id(graph.nodes[j].phone, graph.nodes[j].state);
    if (slot_of.emplace(node_state[j], slot_state.size()).second)
      slot_state.push_back(node_state[j]);
  }
  std::vector<size_t> node_slot(N);
  for (size_t j = 0; j < N; ++j) node_slot[j] = slot_of[node_state[j]];
  const size_t S = slot_state.size();
  std::vector<double> emit(T * S);
  for (size_t t = 0; t < T; ++t)
    for (size_t s = 0; s < S; ++s)
      emit[t * S + s] = model.state(slot_state[s]).gmm.log_likelihood(feats.row(t));

  std::vector<double> log_loop(N), log_fwd(N);
  for (size_t j = 0; j < N; ++j) {
    log_loop[j] = std::log(model.state(node_state[j]).loop_prob);
    log_fwd[j] = std::log(model.state(node_state[j]).forward_prob());
  }

  enum : uint8_t { kStay, kForward, kSkip };
  std::vector<double> prev(N, kNegInf), cur(N, kNegInf);
  std::vector<uint8_t> back(T * N, kStay);
  prev[0] = emit[node_slot[0]];
  if (N > 1 && graph.nodes[0].optional) prev[1] = emit[node_slot[1]];
  for (size_t t = 1; t < T; ++t) {
    for (size_t j = 0; j < N; ++j) {
      double best = prev[j] + log_loop[j];
      uint8_t arg = kStay;
      if (j >= 1) {
        double c = prev[j - 1] + log_fwd[j - 1];
        if (c > best) best = c, arg = kForward;
      }
      if (j >= 2 && graph.nodes[j - 1].optional) {
        double c = prev[j - 2] + log_fwd[j - 2];
        if (c > best) best = c, arg = kSkip;
      }
      cur[j] = best == kNegInf ? kNegInf : best + emit[t * S + node_slot[j]];
      back[t * N + j] = arg;
    }
    std::swap(prev, cur);
  }

  size_t end = N - 1;
  if (N > 1 && graph.nodes[N - 1].optional && prev[N - 2] > prev[N - 1]) end = N - 2;
  if (prev[end] == kNegInf) throw InfeasibleAlignmentError("no complete path through graph");

  Alignment ali;
  ali.score = prev[end];
  ali.frame_shift = feats.frame_shift;
  ali.silence_phone = model.phones().silence();
  ali.node_path.resize(T);
  size_t j = end;
  for (size_t t = T; t-- > 0;) {
    ali.node_path[t] = j;
    if (t == 0) break;
    switch (back[t * N + j]) {
      case kForward: j -= 1; break;
      case kSkip: j -= 2; break;
      default: break;
    }
  }
  ali.frames.reserve(T);
  for (size_t t = 0; t < T; ++t) {
    const auto &node = graph.nodes[ali.node_path[t]];
    ali.frames.push_back({model.phones().name(node.phone), node.state});
  }
  return ali;
}

bool is_legal_expansion(const Alignment &ali, const StateGraph &graph, const PhoneSet &phones) {
  const size_t N = graph.size();
  if (N == 0 || ali.frames.empty()) return false;
  auto matches = [&](size_t node, const FrameLabel &lab) {
    const auto &n = graph.nodes[node];
    return phones.name(n.phone) == lab.phone && n.state == lab.state;
  };
  std::set<size_t> live;
  if (matches(0, ali.frames[0])) live.insert(0);
  if (N > 1 && graph.nodes[0].optional && matches(1, ali.frames[0])) live.insert(1);
  for (size_t t = 1; t < ali.frames.size() && !live.empty(); ++t) {
    std::set<size_t> next;
    for (size_t j : live) {
      for (size_t k : {j, j + 1, j + 2}) {
        if (k >= N) continue;
        if (k == j + 2 && !graph.nodes[j + 1].optional) continue;
        if (matches(k, ali.frames[t])) next.insert(k);
      }
    }
    live = std::move(next);
  }
  if (live.count(N - 1)) return true;
  return N > 1 && graph.nodes[N - 1].optional && live.count(N - 2);
}

// ---------------------------------------------------------------------------
// Training

GmmHmmModel accumulate_and_update(const GmmHmmModel &model,
                                  std::span<const AlignedUtterance> data) {
  const size_t D = model.feature_dim();
  const auto &phones = model.phones();
  std::vector<std::vector<const float *>> frames_of(model.num_states());
  std::map<std::string, int> phone_cache;
  for (const auto &u : data) {
    if (u.features->frames != u.alignment->num_frames())
      throw ValidationError(fmt::format("alignment of '{}' has {} frames, features have {}",
                                        u.alignment->utterance_id, u.alignment->num_frames(),
                                        u.features->frames));
    if (u.features->dims != D) throw ValidationError("feature dimension mismatch");
    for (size_t t = 0; t < u.features->frames; ++t) {
      const auto &lab = u.alignment->frames[t];
      auto it = phone_cache.find(lab.phone);
      if (it == phone_cache.end()) it = phone_cache.emplace(lab.phone, phones.index(lab.phone)).first;
      frames_of[model.state_id(it->second, lab.state)].push_back(u.features->row(t).data());
    }
  }

  GmmHmmModel out = model;
  const double floor = model.config().variance_floor;
  for (size_t s = 0; s < model.num_states(); ++s) {
    const auto &rows = frames_of[s];
    if (rows.empty()) continue;
    const DiagGmm &old = model.state(s).gmm;
    const size_t K = old.num_components();
    const size_t n = rows.size();

    // responsibilities, n x K
    std::vector<double> resp(n * K, 1.0);
    if (K > 1) {
      std::vector<double> ll;
      for (size_t i = 0; i < n; ++i) {
        old.component_log_likelihoods({rows[i], D}, ll);
        double total = log_sum_exp(ll);
        for (size_t k = 0; k < K; ++k) resp[i * K + k] = std::exp(ll[k] - total);
      }
    }

    DiagGmm g = old;
    double wsum = 0.0;
    for (size_t k = 0; k < K; ++k) {
      double occ = 0.0;
      for (size_t i = 0; i < n; ++i) occ += resp[i * K + k];
      g.weights[k] = occ / static_cast<double>(n);
      wsum += g.weights[k];
      if (occ < kMinOccupancy) continue;
      std::vector<double> mean(D, 0.0), var(D, 0.0);
      for (size_t i = 0; i < n; ++i) {
        double r = resp[i * K + k];
        for (size_t d = 0; d < D; ++d) mean[d] += r * rows[i][d];
      }
      for (auto &m : mean) m /= occ;
      for (size_t i = 0; i < n; ++i) {
        double r = resp[i * K + k];
        for (size_t d = 0; d < D; ++d) {
          double diff = rows[i][d] - mean[d];
          var[d] += r * diff * diff;
        }
      }
      for (auto &v : var) v = std::max(v / occ, floor);
      g.means[k] = std::move(mean);
      g.variances[k] = std::move(var);
    }
    for (auto &w : g.weights) w /= wsum;
    out.state(s).gmm = std::move(g);
  }
  return out;
}

GmmHmmModel split_mixtures(const GmmHmmModel &model) {
  GmmHmmModel out = model;
  const auto &cfg = model.config();
  for (size_t s = 0; s < model.num_states(); ++s) {
    const DiagGmm &old = model.state(s).gmm;
    DiagGmm g;
    for (size_t k = 0; k < old.num_components(); ++k) {
      if (old.weights[k] < cfg.split_threshold) {
        g.weights.push_back(old.weights[k]);
        g.means.push_back(old.means[k]);
        g.variances.push_back(old.variances[k]);
        continue;
      }
      for (double sign : {-1.0, 1.0}) {
        std::vector<double> mu = old.means[k];
        for (size_t d = 0; d < mu.size(); ++d)
          mu[d] += sign * cfg.split_perturbation * std::sqrt(old.variances[k][d]);
        g.weights.push_back(old.weights[k] / 2.0);
        g.means.push_back(std::move(mu));
        g.variances.push_back(old.variances[k]);
      }
    }
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    for (auto &w : g.weights) w /= wsum;
    out.state(s).gmm = std::move(g);
  }
  return out;
}

GmmHmmModel flat_start_model(const PhoneSet &phones, std::span<const FeatureMatrix> feats,
                             const GmmHmmConfig &cfg) {
  if (feats.empty()) throw ValidationError("flat start needs at least one utterance");
  const size_t D = feats.front().dims;
  std::vector<double> mean(D, 0.0), var(D, 0.0);
  size_t n = 0;
  for (const auto &f : feats) {
    if (f.dims != D) throw ValidationError("feature dimension mismatch across corpus");
    for (size_t t = 0; t < f.frames; ++t)
      for (size_t d = 0; d < D; ++d) mean[d] += f.at(t, d);
    n += f.frames;
  }
  if (n == 0) throw ValidationError("flat start over zero frames");
  for (auto &m : mean) m /= static_cast<double>(n);
  for (const auto &f : feats)
    for (size_t t = 0; t < f.frames; ++t)
      for (size_t d = 0; d < D; ++d) {
        double diff = f.at(t, d) - mean[d];
        var[d] += diff * diff;
      }
  for (auto &v : var) v = std::max(v / static_cast<double>(n), cfg.variance_floor);

  GmmHmmModel model(phones, D, cfg);
  for (size_t s = 0; s < model.num_states(); ++s) {
    model.state(s).gmm.means = {mean};
    model.state(s).gmm.variances = {var};
  }
  return model;
}

void TrainSchedule::validate() const {
  if (align_iters < 0) throw ValidationError("train.align_iters must be >= 0");
  if (split_iters < 0) throw ValidationError("train.split_iters must be >= 0");
  model.validate();
}

TrainResult train(std::span<const TrainUtterance> corpus, const Lexicon &lex,
                  const PhoneSet &phones, const TrainSchedule &schedule, int jobs) {
  schedule.validate();
  TrainResult result;
  result.alignments.resize(corpus.size());

  std::vector<size_t> kept;
  std::vector<StateGraph> graphs;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto &u = corpus[i];
    try {
      StateGraph g = build_state_graph(u.words, lex, phones, schedule.model);
      if (u.features.frames < g.min_frames())
        throw InfeasibleAlignmentError(fmt::format("{} frames, need {}", u.features.frames,
                                                   g.min_frames()));
      kept.push_back(i);
      graphs.push_back(std::move(g));
    } catch (const OovError &e) {
      spdlog::warn("skipping '{}': {}", u.id, e.what());
      result.skipped.push_back(u.id);
    } catch (const InfeasibleAlignmentError &e) {
      spdlog::warn("skipping '{}': {}", u.id, e.what());
      result.skipped.push_back(u.id);
    }
  }
  if (!result.skipped.empty())
    spdlog::warn("{} of {} utterances skipped during training", result.skipped.size(),
                 corpus.size());
  if (kept.empty()) throw ValidationError("no trainable utterances");

  std::vector<FeatureMatrix> feats;
  for (size_t i : kept) feats.push_back(corpus[i].features);
  GmmHmmModel model = flat_start_model(phones, feats, schedule.model);

  std::vector<Alignment> alis(kept.size());
  for (size_t k = 0; k < kept.size(); ++k) {
    alis[k] = linear_alignment(feats[k].frames, graphs[k], phones);
    alis[k].utterance_id = corpus[kept[k]].id;
    alis[k].frame_shift = feats[k].frame_shift;
  }

  auto update = [&](const GmmHmmModel &m) {
    std::vector<AlignedUtterance> data;
    for (size_t k = 0; k < kept.size(); ++k) data.push_back({&feats[k], &alis[k]});
    return accumulate_and_update(m, data);
  };
  auto realign = [&](const GmmHmmModel &m) {
    parallel_for(kept.size(), jobs, [&](size_t k) {
      alis[k] = viterbi_align(feats[k], m, graphs[k]);
      alis[k].utterance_id = corpus[kept[k]].id;
    });
    double total = 0.0;
    for (const auto &a : alis) total += a.score;
    return total;
  };

  for (int it = 0; it < schedule.align_iters; ++it) {
    model = update(model);
    result.align_scores.push_back(realign(model));
    spdlog::debug("align iteration {}: total score {:.6f}", it + 1, result.align_scores.back());
  }
  for (int it = 0; it < schedule.split_iters; ++it) {
    model = split_mixtures(model);
    result.split_scores.push_back(realign(model));
    model = update(model);
    spdlog::debug("split iteration {}: {} max components", it + 1, model.max_components());
  }
  if (schedule.split_iters > 0) realign(model);

  for (size_t k = 0; k < kept.size(); ++k) result.alignments[kept[k]] = std::move(alis[k]);
  result.model = std::move(model);
  return result;
}

}  // namespace sdtk
