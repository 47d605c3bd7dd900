// core/src/audio_io.cpp

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

#include "sdtk/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sdtk/binary_io.hpp"
#include "sdtk/error.hpp"

namespace sdtk {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xfffe;

bool tag_is(const char *tag, const char *want) {
  return std::equal(tag, tag + 4, want);
}

}  // namespace

size_t seconds_to_sample(double seconds, int sample_rate) {
  return static_cast<size_t>(std::floor(seconds * sample_rate + 0.5));
}

AudioBuffer read_wav(std::istream &is, const std::string &what) {
  LeReader rd(is, what);
  char tag[4];
  rd.bytes(tag);
  if (!tag_is(tag, "RIFF")) throw FormatError(what + ": not a RIFF file");
  rd.u32();  // riff size; unreliable in the wild, chunks are walked instead
  rd.bytes(tag);
  if (!tag_is(tag, "WAVE")) throw FormatError(what + ": not a WAVE file");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  uint32_t sample_rate = 0;

  while (true) {
    rd.bytes(tag);
    uint32_t chunk_size = rd.u32();
    if (tag_is(tag, "fmt ")) {
      if (chunk_size < 16) throw ParseError(what + ": fmt chunk too short");
      format = rd.u16();
      channels = rd.u16();
      sample_rate = rd.u32();
      rd.u32();  // byte rate
      block_align = rd.u16();
      bits = rd.u16();
      uint32_t consumed = 16;
      if (format == kFormatExtensible) {
        if (chunk_size < 40) throw ParseError(what + ": extensible fmt chunk too short");
        rd.u16();  // cbSize
        rd.u16();  // valid bits
        rd.u32();  // channel mask
        format = rd.u16();  // first two bytes of the subformat GUID
        char guid_rest[14];
        rd.bytes(guid_rest);
        consumed = 40;
      }
      std::vector<char> skip(chunk_size - consumed + (chunk_size & 1));
      rd.bytes(skip);
      have_fmt = true;
    } else if (tag_is(tag, "data")) {
      if (!have_fmt) throw ParseError(what + ": data chunk before fmt chunk");
      if (channels < 1 || channels > 2)
        throw FormatError(fmt::format("{}: unsupported channel count {}", what, channels));
      bool pcm16 = format == kFormatPcm && bits == 16;
      bool f32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !f32)
        throw FormatError(fmt::format("{}: unsupported codec (format {}, {} bits)", what,
                                      format, bits));
      if (sample_rate == 0) throw FormatError(what + ": zero sample rate");
      uint32_t bytes_per_sample = bits / 8;
      if (block_align != bytes_per_sample * channels)
        throw ParseError(what + ": inconsistent block alignment");
      if (chunk_size % block_align != 0) throw ParseError(what + ": truncated sample frame");

      std::vector<char> raw(chunk_size);
      rd.bytes(raw);
      size_t frames = chunk_size / block_align;
      AudioBuffer out;
      out.sample_rate = static_cast<int>(sample_rate);
      out.samples.resize(frames);
      auto sample_at = [&](size_t idx) -> float {
        const auto *p = reinterpret_cast<const unsigned char *>(raw.data()) + idx * bytes_per_sample;
        if (pcm16) {
          auto v = static_cast<int16_t>(static_cast<uint16_t>(p[0] | (p[1] << 8)));
          return static_cast<float>(v) / 32768.0f;
        }
        uint32_t u = uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
                     uint32_t(p[3]) << 24;
        float v = std::bit_cast<float>(u);
        if (!std::isfinite(v)) throw ParseError(what + ": non-finite float sample");
        return std::clamp(v, -1.0f, 1.0f);
      };
      for (size_t i = 0; i < frames; ++i) {
        if (channels == 1) {
          out.samples[i] = sample_at(i);
        } else {
          out.samples[i] = 0.5f * (sample_at(2 * i) + sample_at(2 * i + 1));
        }
      }
      return out;
    } else {
      std::vector<char> skip(chunk_size + (chunk_size & 1));
      rd.bytes(skip);
    }
  }
}

AudioBuffer load_wav(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_wav(is, path.string());
}

void write_wav(std::ostream &os, const AudioBuffer &audio, WavEncoding encoding) {
  LeWriter wr(os);
  uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  uint32_t block = bits / 8;
  uint32_t data_size = static_cast<uint32_t>(audio.samples.size() * block);
  wr.bytes(std::span<const char>("RIFF", 4));
  wr.u32(36 + data_size);
  wr.bytes(std::span<const char>("WAVE", 4));
  wr.bytes(std::span<const char>("fmt ", 4));
  wr.u32(16);
  wr.u16(encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  wr.u16(1);
  wr.u32(static_cast<uint32_t>(audio.sample_rate));
  wr.u32(static_cast<uint32_t>(audio.sample_rate) * block);
  wr.u16(static_cast<uint16_t>(block));
  wr.u16(bits);
  wr.bytes(std::span<const char>("data", 4));
  wr.u32(data_size);
  for (float s : audio.samples) {
    if (encoding == WavEncoding::kPcm16) {
      long v = std::lround(static_cast<double>(s) * 32768.0);
      v = std::clamp(v, -32768L, 32767L);
      wr.u16(static_cast<uint16_t>(static_cast<int16_t>(v)));
    } else {
      wr.f32(s);
    }
  }
  if (!os) throw IoError("failed writing wav data");
}

void write_wav(const std::filesystem::path &path, const AudioBuffer &audio,
               WavEncoding encoding) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create " + path.string());
  write_wav(os, audio, encoding);
}

AudioBuffer cut_sample_ranges(const AudioBuffer &audio, std::span<const SampleRange> remove) {
  size_t prev_end = 0;
  size_t removed = 0;
  for (const auto &r : remove) {
    if (r.begin > r.end || r.end > audio.size())
      throw BoundsError(fmt::format("sample range [{}, {}) outside [0, {})", r.begin, r.end,
                                    audio.size()));
    if (r.begin < prev_end) throw BoundsError("sample ranges unsorted or overlapping");
    prev_end = r.end;
    removed += r.length();
  }
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.reserve(audio.size() - removed);
  size_t pos = 0;
  for (const auto &r : remove) {
    out.samples.insert(out.samples.end(), audio.samples.begin() + pos,
                       audio.samples.begin() + r.begin);
    pos = r.end;
  }
  out.samples.insert(out.samples.end(), audio.samples.begin() + pos, audio.samples.end());
  return out;
}

std::vector<SampleRange> intervals_to_ranges(std::span<const TimeInterval> intervals,
                                             const AudioBuffer &audio) {
  std::vector<SampleRange> ranges;
  ranges.reserve(intervals.size());
  double prev_end = 0.0;
  for (const auto &iv : intervals) {
    if (!(iv.start >= 0.0) || !(iv.end > iv.start))
      throw BoundsError(fmt::format("invalid interval ({}, {})", iv.start, iv.end));
    if (iv.start < prev_end)
      throw BoundsError(fmt::format("interval ({}, {}) unsorted or overlapping", iv.start, iv.end));
    prev_end = iv.end;
    SampleRange r{seconds_to_sample(iv.start, audio.sample_rate),
                  seconds_to_sample(iv.end, audio.sample_rate)};
    if (r.end > audio.size())
      throw BoundsError(fmt::format("interval ({}, {}) exceeds duration {}", iv.start, iv.end,
                                    audio.duration_seconds()));
    ranges.push_back(r);
  }
  return ranges;
}

AudioBuffer cut_intervals(const AudioBuffer &audio, std::span<const TimeInterval> remove) {
  auto ranges = intervals_to_ranges(remove, audio);
  return cut_sample_ranges(audio, ranges);
}

std::filesystem::path CorpusManifest::audio_path(const ManifestEntry &e) const {
  std::filesystem::path p(e.audio);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

CorpusManifest parse_manifest(std::istream &is, const std::string &what) {
  using nlohmann::json;
  CorpusManifest m;
  std::set<std::string> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = [&] { return fmt::format("{}:{}", what, lineno); };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ParseError(where() + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw ParseError(where() + ": expected a JSON object");
    auto field = [&](const char *key) -> std::string {
      auto it = obj.find(key);
      if (it == obj.end()) throw ParseError(where() + ": missing field '" + key + "'");
      if (!it->is_string()) throw ParseError(where() + ": field '" + key + "' must be a string");
      return it->get<std::string>();
    };
    ManifestEntry e;
    e.id = field("id");
    e.audio = field("audio");
    e.text = field("text");
    if (obj.contains("speaker")) e.speaker = field("speaker");
    if (obj.contains("warning")) e.warning = field("warning");
    if (e.id.empty()) throw ParseError(where() + ": empty utterance id");
    if (e.text.find_first_not_of(" \t\r\n") == std::string::npos)
      throw ValidationError(where() + ": empty transcript for '" + e.id + "'");
    if (!seen.insert(e.id).second)
      throw ValidationError(where() + ": duplicate utterance id '" + e.id + "'");
    m.entries.push_back(std::move(e));
  }
  return m;
}

CorpusManifest load_manifest(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  auto m = parse_manifest(is, path.string());
  m.base_dir = path.parent_path();
  return m;
}

void write_manifest(const std::filesystem::path &path, const CorpusManifest &manifest) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot create " + path.string());
  for (const auto &e : manifest.entries) {
    nlohmann::ordered_json obj;
    obj["id"] = e.id;
    obj["audio"] = e.audio;
    obj["text"] = e.text;
    if (e.speaker) obj["speaker"] = *e.speaker;
    if (e.warning) obj["warning"] = *e.warning;
    os << obj.dump() << '\n';
  }
}

}  // namespace sdtk
