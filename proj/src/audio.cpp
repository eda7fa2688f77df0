// src/audio.cpp

// Copyright 2026  The alsed Authors
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

#include "alsed/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "alsed/binary_io.hpp"
#include "alsed/error.hpp"

namespace alsed {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

std::uint32_t le32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

float decode_sample(const char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    float v;
    std::memcpy(&v, p, 4);
    return v;
  }
  switch (bits) {
    case 8:
      return (static_cast<float>(static_cast<unsigned char>(p[0])) - 128.0f) /
             128.0f;
    case 16:
      return static_cast<float>(static_cast<std::int16_t>(le16(p))) / 32768.0f;
    case 24: {
      std::int32_t v = (static_cast<unsigned char>(p[0])) |
                       (static_cast<unsigned char>(p[1]) << 8) |
                       (static_cast<std::int32_t>(static_cast<signed char>(p[2])) << 16);
      return static_cast<float>(v) / 8388608.0f;
    }
    default:
      break;
  }
  throw InputError("unsupported PCM bit depth " + std::to_string(bits));
}

}  // namespace

AudioClip decode_wav(std::string_view bytes, std::string recording_id) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE")
    throw InputError(recording_id + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    auto id = bytes.substr(pos, 4);
    std::uint32_t size = le32(bytes.data() + pos + 4);
    std::size_t body = pos + 8;
    std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (id == "fmt ") {
      if (avail < 16) throw InputError(recording_id + ": truncated fmt chunk");
      const char* f = bytes.data() + body;
      format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) throw InputError(recording_id + ": truncated fmt chunk");
        format = le16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.substr(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt || !have_data)
    throw InputError(recording_id + ": missing fmt or data chunk");
  if (channels == 0 || rate == 0)
    throw InputError(recording_id + ": invalid channel count or sample rate");
  bool ok = (format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24)) ||
            (format == kFormatFloat && bits == 32);
  if (!ok)
    throw InputError(recording_id + ": unsupported encoding (format " +
                     std::to_string(format) + ", " + std::to_string(bits) +
                     " bits)");

  std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  std::size_t n = data.size() / frame_bytes;
  if (n == 0) throw InputError(recording_id + ": zero-length audio");

  AudioClip clip;
  clip.recording_id = std::move(recording_id);
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    clip.samples[static_cast<Eigen::Index>(i)] =
        decode_sample(data.data() + i * frame_bytes, format, bits);
  return clip;
}

AudioClip load_audio(const std::filesystem::path& path, std::string recording_id) {
  if (recording_id.empty()) recording_id = path.stem().string();
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const InputError&) {
    throw InputError(recording_id + ": unreadable audio file " + path.string());
  }
  return decode_wav(bytes, std::move(recording_id));
}

std::string encode_wav16(const Eigen::Ref<const Eigen::VectorXf>& samples,
                         int sample_rate) {
  const auto n = static_cast<std::uint32_t>(samples.size());
  std::string out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  put_bytes(out, "RIFF");
  put_u32(out, 36 + 2 * n);
  put_bytes(out, "WAVEfmt ");
  put_u32(out, 16);
  std::uint16_t fmt[2] = {kFormatPcm, 1};
  out.append(reinterpret_cast<const char*>(fmt), 4);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  std::uint16_t align[2] = {2, 16};
  out.append(reinterpret_cast<const char*>(align), 4);
  put_bytes(out, "data");
  put_u32(out, 2 * n);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    double v = std::round(static_cast<double>(samples[i]) * 32768.0);
    auto s = static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
    out.append(reinterpret_cast<const char*>(&s), 2);
  }
  return out;
}

void write_wav16(const std::filesystem::path& path, const AudioClip& clip) {
  write_file_atomic(path, encode_wav16(clip.samples, clip.sample_rate));
}

}  // namespace alsed
