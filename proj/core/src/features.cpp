// core/src/features.cpp

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

#include "sdtk/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>
#include <fmt/format.h>

#include "sdtk/binary_io.hpp"
#include "sdtk/error.hpp"

namespace sdtk {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(size_t n) : n_(n) {
    in_ = static_cast<double *>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  // Copies `signal` (zero-padded to n) and transforms.
  void run(std::span<const double> signal) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(signal.begin(), signal.begin() + std::min(signal.size(), n_), in_);
    fftw_execute_dft_r2c(plan_, in_, out_);
  }
  size_t bins() const { return n_ / 2 + 1; }
  double magnitude(size_t k) const { return std::hypot(out_[k][0], out_[k][1]); }
  std::complex<double> value(size_t k) const { return {out_[k][0], out_[k][1]}; }

 private:
  size_t n_;
  double *in_ = nullptr;
  fftw_complex *out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Pre-emphasis, log energy and Hann window for one frame, in place.
// Returns the floored log energy of the pre-emphasized frame.
double prepare_frame(std::vector<double> &frame, const FeatureConfig &cfg,
                     std::span<const double> window) {
  for (size_t i = frame.size() - 1; i > 0; --i) frame[i] -= cfg.preemphasis * frame[i - 1];
  frame[0] -= cfg.preemphasis * frame[0];
  double energy = 0.0;
  for (double s : frame) energy += s * s;
  for (size_t i = 0; i < frame.size(); ++i) frame[i] *= window[i];
  return std::log(std::max(energy, cfg.log_floor));
}

std::vector<double> hann_window(size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n - 1));
  return w;
}

// Computes log-mel rows and (optionally) per-frame log energies.
FeatureMatrix log_mel_frames(const AudioBuffer &audio, const FeatureConfig &cfg,
                             std::vector<double> *energies) {
  cfg.validate();
  size_t win = window_samples(cfg, audio.sample_rate);
  size_t shift = shift_samples(cfg, audio.sample_rate);
  if (audio.size() < win)
    throw ValidationError(fmt::format("audio of {} samples shorter than one {}-sample window",
                                      audio.size(), win));
  size_t frames = num_frames(audio.size(), cfg, audio.sample_rate);
  size_t nfft = next_pow2(win);
  MelFilterbank fbank(cfg.num_mel_filters, nfft, audio.sample_rate);
  auto window = hann_window(win);
  RealFft fft(nfft);

  FeatureMatrix out(frames, static_cast<size_t>(cfg.num_mel_filters));
  out.frame_shift = cfg.frame_shift;
  out.window_length = cfg.window_length;
  if (energies) energies->assign(frames, 0.0);

  std::vector<double> frame(win);
  std::vector<double> mag(nfft / 2 + 1);
  for (size_t t = 0; t < frames; ++t) {
    const float *src = audio.samples.data() + t * shift;
    std::copy(src, src + win, frame.begin());
    double e = prepare_frame(frame, cfg, window);
    if (energies) (*energies)[t] = e;
    fft.run(frame);
    for (size_t k = 0; k < mag.size(); ++k) mag[k] = fft.magnitude(k);
    auto mel = fbank.apply(mag);
    auto row = out.row(t);
    for (size_t m = 0; m < mel.size(); ++m)
      row[m] = static_cast<float>(std::log(std::max(mel[m], cfg.log_floor)));
  }
  return out;
}

}  // namespace

void FeatureConfig::validate() const {
  auto fail = [](const std::string &msg) { throw ValidationError("features." + msg); };
  if (!(window_length > 0)) fail("window_length must be positive");
  if (!(frame_shift > 0)) fail("frame_shift must be positive");
  if (window_length < frame_shift) fail("window_length must be >= frame_shift");
  if (num_mel_filters < 1) fail("num_mel_filters must be >= 1");
  if (num_cepstra < 1) fail("num_cepstra must be >= 1");
  if (num_cepstra > num_mel_filters) fail("num_cepstra must be <= num_mel_filters");
  if (preemphasis < 0 || preemphasis >= 1) fail("preemphasis must be in [0, 1)");
  if (delta_orders < 0 || delta_orders > 2) fail("delta_orders must be in 0..2");
  if (delta_context < 1) fail("delta_context must be >= 1");
  if (!(log_floor > 0)) fail("log_floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int num_filters, size_t fft_size, int sample_rate) {
  double nyquist = sample_rate / 2.0;
  double mel_hi = hz_to_mel(nyquist);
  double step = mel_hi / (num_filters + 1);
  size_t bins = fft_size / 2 + 1;
  for (int m = 0; m < num_filters; ++m) {
    double left = step * m, center = step * (m + 1), right = step * (m + 2);
    center_hz_.push_back(mel_to_hz(center));
    Filter f;
    bool started = false;
    for (size_t k = 0; k < bins; ++k) {
      double mel = hz_to_mel(static_cast<double>(k) * sample_rate / fft_size);
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      if (w > 0.0) {
        if (!started) {
          f.first_bin = k;
          started = true;
        }
        f.weights.resize(k - f.first_bin + 1, 0.0);
        f.weights.back() = w;
      }
    }
    filters_.push_back(std::move(f));
  }
}

std::vector<double> MelFilterbank::apply(std::span<const double> magnitude) const {
  std::vector<double> out(filters_.size(), 0.0);
  for (size_t m = 0; m < filters_.size(); ++m) {
    const auto &f = filters_[m];
    double acc = 0.0;
    for (size_t i = 0; i < f.weights.size(); ++i) acc += f.weights[i] * magnitude[f.first_bin + i];
    out[m] = acc;
  }
  return out;
}

std::vector<std::complex<double>> real_dft(std::span<const double> signal) {
  RealFft fft(signal.size());
  fft.run(signal);
  std::vector<std::complex<double>> out(fft.bins());
  for (size_t k = 0; k < out.size(); ++k) out[k] = fft.value(k);
  return out;
}

std::vector<double> dct_ii_matrix(size_t n) {
  std::vector<double> m(n * n);
  for (size_t k = 0; k < n; ++k) {
    double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (size_t i = 0; i < n; ++i)
      m[k * n + i] = scale * std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
  }
  return m;
}

size_t window_samples(const FeatureConfig &cfg, int sample_rate) {
  return static_cast<size_t>(std::lround(cfg.window_length * sample_rate));
}

size_t shift_samples(const FeatureConfig &cfg, int sample_rate) {
  return static_cast<size_t>(std::lround(cfg.frame_shift * sample_rate));
}

size_t num_frames(size_t num_samples, const FeatureConfig &cfg, int sample_rate) {
  size_t win = window_samples(cfg, sample_rate);
  if (num_samples < win) return 0;
  return 1 + (num_samples - win) / shift_samples(cfg, sample_rate);
}

FeatureMatrix compute_log_mel(const AudioBuffer &audio, const FeatureConfig &cfg) {
  return log_mel_frames(audio, cfg, nullptr);
}

FeatureMatrix compute_mfcc(const AudioBuffer &audio, const FeatureConfig &cfg) {
  std::vector<double> energies;
  FeatureMatrix mel = log_mel_frames(audio, cfg, &energies);
  size_t nmel = static_cast<size_t>(cfg.num_mel_filters);
  size_t ncep = static_cast<size_t>(cfg.num_cepstra);
  auto dct = dct_ii_matrix(nmel);

  FeatureMatrix stat(mel.frames, ncep + (cfg.include_energy ? 1 : 0));
  stat.frame_shift = cfg.frame_shift;
  stat.window_length = cfg.window_length;
  for (size_t t = 0; t < mel.frames; ++t) {
    auto in = mel.row(t);
    auto out = stat.row(t);
    for (size_t k = 0; k < ncep; ++k) {
      double acc = 0.0;
      for (size_t i = 0; i < nmel; ++i) acc += dct[k * nmel + i] * in[i];
      out[k] = static_cast<float>(acc);
    }
    if (cfg.include_energy) out[ncep] = static_cast<float>(energies[t]);
  }
  FeatureMatrix feat =
      cfg.delta_orders > 0 ? append_deltas(stat, cfg.delta_orders, cfg.delta_context) : stat;
  if (cfg.mean_variance_normalize) normalize_mean_variance(feat);
  return feat;
}

FeatureMatrix append_deltas(const FeatureMatrix &feat, int orders, int context) {
  if (feat.empty()) throw ValidationError("append_deltas: empty feature matrix");
  if (orders < 1 || orders > 2) throw ValidationError("append_deltas: orders must be 1 or 2");
  if (context < 1) throw ValidationError("append_deltas: context must be >= 1");
  size_t T = feat.frames, D = feat.dims;
  double denom = 0.0;
  for (int n = 1; n <= context; ++n) denom += n * n;
  denom *= 2.0;

  FeatureMatrix out(T, D * (1 + orders));
  out.frame_shift = feat.frame_shift;
  out.window_length = feat.window_length;
  // level 0 is the input; level k is the delta of level k-1
  std::vector<double> prev(T * D), cur(T * D);
  for (size_t i = 0; i < T * D; ++i) prev[i] = feat.values[i];
  for (size_t t = 0; t < T; ++t)
    for (size_t d = 0; d < D; ++d) out.at(t, d) = feat.at(t, d);
  auto clamp_t = [T](long t) { return static_cast<size_t>(std::clamp<long>(t, 0, long(T) - 1)); };
  for (int level = 1; level <= orders; ++level) {
    for (size_t t = 0; t < T; ++t) {
      for (size_t d = 0; d < D; ++d) {
        double acc = 0.0;
        for (int n = 1; n <= context; ++n)
          acc += n * (prev[clamp_t(long(t) + n) * D + d] - prev[clamp_t(long(t) - n) * D + d]);
        cur[t * D + d] = acc / denom;
        out.at(t, level * D + d) = static_cast<float>(cur[t * D + d]);
      }
    }
    std::swap(prev, cur);
  }
  return out;
}

void normalize_mean_variance(FeatureMatrix &feat) {
  if (feat.empty()) return;
  for (size_t d = 0; d < feat.dims; ++d) {
    double mean = 0.0;
    for (size_t t = 0; t < feat.frames; ++t) mean += feat.at(t, d);
    mean /= feat.frames;
    double var = 0.0;
    for (size_t t = 0; t < feat.frames; ++t) {
      double x = feat.at(t, d) - mean;
      var += x * x;
    }
    var /= feat.frames;
    double inv = var > 1e-20 ? 1.0 / std::sqrt(var) : 1.0;
    for (size_t t = 0; t < feat.frames; ++t)
      feat.at(t, d) = static_cast<float>((feat.at(t, d) - mean) * inv);
  }
}

void write_feature_matrix(std::ostream &os, const FeatureMatrix &feat) {
  LeWriter wr(os);
  wr.bytes(std::span<const char>("SPFM", 4));
  wr.u32(static_cast<uint32_t>(feat.frames));
  wr.u32(static_cast<uint32_t>(feat.dims));
  for (float v : feat.values) wr.f32(v);
  if (!os) throw IoError("failed writing feature matrix");
}

void write_feature_matrix(const std::filesystem::path &path, const FeatureMatrix &feat) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create " + path.string());
  write_feature_matrix(os, feat);
}

FeatureMatrix read_feature_matrix(std::istream &is, const std::string &what) {
  LeReader rd(is, what);
  char magic[4];
  rd.bytes(magic);
  if (std::string_view(magic, 4) != "SPFM") throw FormatError(what + ": bad magic, expected SPFM");
  uint32_t T = rd.u32();
  uint32_t D = rd.u32();
  if (uint64_t(T) * D > (uint64_t(1) << 32)) throw ParseError(what + ": implausible matrix size");
  FeatureMatrix m(T, D);
  for (auto &v : m.values) {
    v = rd.f32();
    if (!std::isfinite(v)) throw ParseError(what + ": non-finite value");
  }
  return m;
}

FeatureMatrix read_feature_matrix(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_feature_matrix(is, path.string());
}

}  // namespace sdtk
