// include/alsed/audio.hpp

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

#ifndef ALSED_AUDIO_HPP_
#define ALSED_AUDIO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace alsed {

/// Mono audio with amplitudes in [-1, 1].
struct AudioClip {
  Eigen::VectorXf samples;
  int sample_rate = 0;
  std::string recording_id;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Decodes RIFF/WAVE bytes (PCM 8/16/24-bit integer or 32-bit float, plain
/// or WAVE_FORMAT_EXTENSIBLE). Multichannel input keeps channel 0 only.
AudioClip decode_wav(std::string_view bytes, std::string recording_id);

/// Reads a WAV file; the recording id defaults to the file stem.
AudioClip load_audio(const std::filesystem::path& path,
                     std::string recording_id = {});

/// 16-bit PCM mono WAV. Samples are clamped to [-1, 1) and mapped with
/// round(x * 32768), the inverse of the decoder's value / 32768 rule.
std::string encode_wav16(const Eigen::Ref<const Eigen::VectorXf>& samples,
                         int sample_rate);

void write_wav16(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace alsed

#endif  // ALSED_AUDIO_HPP_
