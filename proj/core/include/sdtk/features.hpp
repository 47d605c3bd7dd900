// core/include/sdtk/features.hpp

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

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "sdtk/audio_io.hpp"

namespace sdtk {

struct FeatureConfig {
  double window_length = 0.025;  // seconds
  double frame_shift = 0.010;    // seconds
  int num_mel_filters = 23;
  int num_cepstra = 16;
  double preemphasis = 0.97;
  bool include_energy = true;
  int delta_orders = 2;
  int delta_context = 2;
  double log_floor = 1e-10;
  // Per-utterance mean/variance normalization of the final features.
  bool mean_variance_normalize = false;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  bool operator==(const FeatureConfig &) const = default;
};

/// Row-major frames x dims matrix. Values are float32 so that the in-memory
/// matrix and its SPFM file image are bit-identical.
struct FeatureMatrix {
  size_t frames = 0;
  size_t dims = 0;
  std::vector<float> values;
  double frame_shift = 0.010;
  double window_length = 0.025;

  FeatureMatrix() = default;
  FeatureMatrix(size_t t, size_t d) : frames(t), dims(d), values(t * d, 0.0f) {}

  std::span<float> row(size_t t) { return {values.data() + t * dims, dims}; }
  std::span<const float> row(size_t t) const { return {values.data() + t * dims, dims}; }
  float &at(size_t t, size_t d) { return values[t * dims + d]; }
  float at(size_t t, size_t d) const { return values[t * dims + d]; }
  bool empty() const { return frames == 0; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters equally spaced on the mel scale between 0 Hz and
/// Nyquist; weights are linear in mel.
class MelFilterbank {
 public:
  MelFilterbank(int num_filters, size_t fft_size, int sample_rate);

  /// `magnitude` has fft_size/2+1 bins.
  std::vector<double> apply(std::span<const double> magnitude) const;
  const std::vector<double> &center_hz() const { return center_hz_; }
  int num_filters() const { return static_cast<int>(center_hz_.size()); }

 private:
  struct Filter {
    size_t first_bin = 0;
    std::vector<double> weights;
  };
  std::vector<Filter> filters_;
  std::vector<double> center_hz_;
};

/// Positive-frequency half of the DFT of a real signal (n/2+1 bins).
std::vector<std::complex<double>> real_dft(std::span<const double> signal);

/// Orthonormal DCT-II matrix, row-major n x n.
std::vector<double> dct_ii_matrix(size_t n);

size_t window_samples(const FeatureConfig &cfg, int sample_rate);
size_t shift_samples(const FeatureConfig &cfg, int sample_rate);
size_t num_frames(size_t num_samples, const FeatureConfig &cfg, int sample_rate);

/// Log mel filterbank outputs, one row per frame, before the DCT.
FeatureMatrix compute_log_mel(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Full pipeline: static cepstra (+ log energy), then deltas per config.
FeatureMatrix compute_mfcc(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Appends `orders` levels of regression deltas with edge replication.
FeatureMatrix append_deltas(const FeatureMatrix &feat, int orders, int context = 2);

void normalize_mean_variance(FeatureMatrix &feat);

// SPFM: "SPFM", u32 T, u32 D, then T*D float32, all little-endian.
void write_feature_matrix(std::ostream &os, const FeatureMatrix &feat);
void write_feature_matrix(const std::filesystem::path &path, const FeatureMatrix &feat);
FeatureMatrix read_feature_matrix(std::istream &is, const std::string &what = "<stream>");
FeatureMatrix read_feature_matrix(const std::filesystem::path &path);

}  // namespace sdtk
