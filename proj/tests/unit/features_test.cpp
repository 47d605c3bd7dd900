// tests/unit/features_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "sdtk/error.hpp"
#include "sdtk/features.hpp"
#include "test_util.hpp"

namespace sdtk {
namespace {

using testing::Gen;

constexpr double kPi = std::numbers::pi;

// Direct O(N^2) DFT, positive-frequency half.
std::vector<std::complex<double>> direct_dft(const std::vector<double> &x, size_t n) {
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0;
    for (size_t i = 0; i < x.size(); ++i)
      acc += x[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * i) / static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

// Dense triangular filterbank built from the mel edge frequencies.
std::vector<std::vector<double>> oracle_filterbank(int filters, size_t nfft, int sr) {
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  double top = mel(sr / 2.0);
  std::vector<double> edges;
  for (int i = 0; i <= filters + 1; ++i) edges.push_back(top * i / (filters + 1));
  std::vector<std::vector<double>> fb(filters, std::vector<double>(nfft / 2 + 1, 0.0));
  for (int m = 0; m < filters; ++m) {
    for (size_t k = 0; k <= nfft / 2; ++k) {
      double x = mel(static_cast<double>(k) * sr / static_cast<double>(nfft));
      double up = (x - edges[m]) / (edges[m + 1] - edges[m]);
      double down = (edges[m + 2] - x) / (edges[m + 2] - edges[m + 1]);
      fb[m][k] = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

// Log-mel of frame t computed from scratch.
std::vector<double> oracle_log_mel(const AudioBuffer &a, size_t t, const FeatureConfig &cfg) {
  size_t win = 400, shift = 160, nfft = 512;
  std::vector<double> x(win);
  for (size_t i = 0; i < win; ++i) x[i] = a.samples[t * shift + i];
  std::vector<double> y(win);
  y[0] = x[0] - cfg.preemphasis * x[0];
  for (size_t i = 1; i < win; ++i) y[i] = x[i] - cfg.preemphasis * x[i - 1];
  for (size_t i = 0; i < win; ++i) y[i] *= 0.5 - 0.5 * std::cos(2 * kPi * i / (win - 1.0));
  auto spec = direct_dft(y, nfft);
  auto fb = oracle_filterbank(cfg.num_mel_filters, nfft, a.sample_rate);
  std::vector<double> out;
  for (const auto &f : fb) {
    double acc = 0;
    for (size_t k = 0; k < f.size(); ++k) acc += f[k] * std::abs(spec[k]);
    out.push_back(std::log(std::max(acc, cfg.log_floor)));
  }
  return out;
}

TEST(Dft, MatchesDirectSummation) {
  Gen g(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(512);
    for (auto &v : x) v = g.uniform(-1, 1);
    auto fast = real_dft(x);
    auto slow = direct_dft(x, 512);
    double peak = 0;
    for (auto &c : slow) peak = std::max(peak, std::abs(c));
    ASSERT_EQ(fast.size(), slow.size());
    for (size_t k = 0; k < fast.size(); ++k) EXPECT_LE(std::abs(fast[k] - slow[k]), 1e-6 * peak);
  }
}

TEST(Filterbank, MatchesHandBuiltWeights) {
  auto fb = oracle_filterbank(23, 512, 16000);
  MelFilterbank bank(23, 512, 16000);
  for (size_t k = 0; k <= 256; ++k) {
    std::vector<double> impulse(257, 0.0);
    impulse[k] = 1.0;
    auto got = bank.apply(impulse);
    for (int m = 0; m < 23; ++m) EXPECT_NEAR(got[m], fb[m][k], 1e-12) << "filter " << m << " bin " << k;
  }
}

TEST(Dct, IsOrthonormal) {
  for (size_t n : {1u, 2u, 5u, 23u, 40u}) {
    auto m = dct_ii_matrix(n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        double dot = 0;
        for (size_t k = 0; k < n; ++k) dot += m[i * n + k] * m[j * n + k];
        EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-10);
      }
  }
}

TEST(Framing, FrameCount) {
  FeatureConfig cfg;
  EXPECT_EQ(window_samples(cfg, 16000), 400u);
  EXPECT_EQ(shift_samples(cfg, 16000), 160u);
  EXPECT_EQ(num_frames(16000, cfg, 16000), 98u);
  EXPECT_EQ(num_frames(400, cfg, 16000), 1u);
  EXPECT_EQ(num_frames(559, cfg, 16000), 1u);
  EXPECT_EQ(num_frames(560, cfg, 16000), 2u);
  EXPECT_EQ(num_frames(399, cfg, 16000), 0u);
}

TEST(Mfcc, DefaultShape) {
  auto a = testing::sine(300, 0.3, 1.0);
  auto f = compute_mfcc(a, {});
  EXPECT_EQ(f.frames, 98u);
  EXPECT_EQ(f.dims, 51u);
}

TEST(Mfcc, ShortAudioIsAnError) {
  auto a = testing::sine(300, 0.3, 0.02);
  EXPECT_THROW(compute_mfcc(a, {}), ValidationError);
}

TEST(Mfcc, ZeroSignalHitsTheFloor) {
  auto a = testing::constant(0.0f, 0.2);
  FeatureConfig cfg;
  auto mel = compute_log_mel(a, cfg);
  const float floor = static_cast<float>(std::log(cfg.log_floor));
  for (float v : mel.values) EXPECT_EQ(v, floor);
  cfg.delta_orders = 0;
  auto f = compute_mfcc(a, cfg);
  for (size_t t = 0; t < f.frames; ++t) {
    EXPECT_FLOAT_EQ(f.at(t, 16), floor);
    EXPECT_NEAR(f.at(t, 0), std::sqrt(23.0) * std::log(cfg.log_floor), 1e-3);
    for (size_t k = 1; k < 16; ++k) EXPECT_NEAR(f.at(t, k), 0.0, 1e-4);
  }
}

TEST(Mfcc, ToneMatchesOracleAndPeaksAtNearestFilter) {
  auto a = testing::sine(1000, 0.5, 0.1);
  FeatureConfig cfg;
  auto mel = compute_log_mel(a, cfg);
  MelFilterbank bank(23, 512, 16000);
  size_t nearest = 0;
  for (size_t m = 0; m < 23; ++m)
    if (std::abs(bank.center_hz()[m] - 1000) < std::abs(bank.center_hz()[nearest] - 1000)) nearest = m;
  for (size_t t = 0; t < mel.frames; ++t) {
    auto want = oracle_log_mel(a, t, cfg);
    for (size_t m = 0; m < 23; ++m) EXPECT_NEAR(mel.at(t, m), want[m], 1e-4);
    auto row = mel.row(t);
    EXPECT_EQ(static_cast<size_t>(std::max_element(row.begin(), row.end()) - row.begin()), nearest);
  }
}

TEST(Mfcc, Deterministic) {
  Gen g(5);
  AudioBuffer a;
  for (int i = 0; i < 8000; ++i) a.samples.push_back(static_cast<float>(g.uniform(-0.1, 0.1)));
  AudioBuffer b = a;
  auto fa = compute_mfcc(a, {});
  auto fb = compute_mfcc(b, {});
  EXPECT_EQ(fa.values, fb.values);
}

TEST(Mfcc, ShiftCovariant) {
  Gen g(6);
  AudioBuffer a;
  for (int i = 0; i < 16000; ++i) a.samples.push_back(static_cast<float>(g.uniform(-0.2, 0.2)));
  AudioBuffer b;
  b.samples.assign(a.samples.begin() + 160, a.samples.end());
  auto fa = compute_mfcc(a, {});
  auto fb = compute_mfcc(b, {});
  ASSERT_EQ(fa.frames, fb.frames + 1);
  // Interior frames are far enough from both edges for the delta windows.
  for (size_t t = 5; t + 5 < fb.frames; ++t)
    for (size_t d = 0; d < fa.dims; ++d) EXPECT_NEAR(fb.at(t, d), fa.at(t + 1, d), 1e-9);
}

TEST(Deltas, ConstantGivesZero) {
  FeatureMatrix f(10, 3);
  for (size_t t = 0; t < 10; ++t)
    for (size_t d = 0; d < 3; ++d) f.at(t, d) = static_cast<float>(d + 1);
  auto out = append_deltas(f, 2, 2);
  ASSERT_EQ(out.dims, 9u);
  for (size_t t = 0; t < 10; ++t)
    for (size_t d = 3; d < 9; ++d) EXPECT_EQ(out.at(t, d), 0.0f);
}

TEST(Deltas, SingleFrameGivesZero) {
  FeatureMatrix f(1, 4);
  for (size_t d = 0; d < 4; ++d) f.at(0, d) = static_cast<float>(d * 3.5);
  auto out = append_deltas(f, 2, 2);
  for (size_t d = 4; d < 12; ++d) EXPECT_EQ(out.at(0, d), 0.0f);
}

TEST(Deltas, RampHasUnitSlope) {
  FeatureMatrix f(12, 1);
  for (size_t t = 0; t < 12; ++t) f.at(t, 0) = static_cast<float>(t);
  auto out = append_deltas(f, 2, 2);
  for (size_t t = 2; t + 2 < 12; ++t) EXPECT_NEAR(out.at(t, 1), 1.0, 1e-6);
  for (size_t t = 4; t + 4 < 12; ++t) EXPECT_NEAR(out.at(t, 2), 0.0, 1e-6);
}

TEST(Spfm, RoundTripAndLayout) {
  Gen g(9);
  FeatureMatrix f(7, 5);
  for (auto &v : f.values) v = static_cast<float>(g.normal());
  std::stringstream ss;
  write_feature_matrix(ss, f);
  std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 8u + 7u * 5u * 4u);
  EXPECT_EQ(bytes.substr(0, 4), "SPFM");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 7);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 5);
  auto back = read_feature_matrix(ss);
  EXPECT_EQ(back.frames, 7u);
  EXPECT_EQ(back.dims, 5u);
  EXPECT_EQ(back.values, f.values);
}

TEST(Spfm, BadMagicAndTruncation) {
  std::stringstream bad("SPFX\x01\0\0\0\x01\0\0\0\0\0\0\0");
  EXPECT_THROW(read_feature_matrix(bad), ValidationError);
  FeatureMatrix f(3, 3);
  std::stringstream ss;
  write_feature_matrix(ss, f);
  std::stringstream cut(ss.str().substr(0, 20));
  EXPECT_THROW(read_feature_matrix(cut), ParseError);
}

TEST(Config, Validation) {
  FeatureConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.num_cepstra = 30;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.frame_shift = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.delta_orders = 3;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

}  // namespace
}  // namespace sdtk
