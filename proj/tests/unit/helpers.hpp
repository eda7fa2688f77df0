// tests/unit/helpers.hpp

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

// Shared fixtures for the unit tests.

#ifndef ALSED_TESTS_HELPERS_HPP_
#define ALSED_TESTS_HELPERS_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "alsed/binary_io.hpp"
#include "alsed/embeddings.hpp"

namespace alsed::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("alsed_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

/// Hand-assembled PCM WAV; `frames` holds interleaved samples as raw integers.
inline std::string make_pcm_wav(const std::vector<std::int32_t>& interleaved, int channels,
                                int rate, int bits) {
  const int bps = bits / 8;
  std::string data;
  for (auto v : interleaved) put_le(data, static_cast<std::uint32_t>(v), bps);
  std::string w = "RIFF";
  put_le(w, 36 + data.size(), 4);
  w += "WAVEfmt ";
  put_le(w, 16, 4);
  put_le(w, 1, 2);
  put_le(w, channels, 2);
  put_le(w, rate, 4);
  put_le(w, static_cast<std::uint64_t>(rate) * channels * bps, 4);
  put_le(w, channels * bps, 2);
  put_le(w, bits, 2);
  w += "data";
  put_le(w, data.size(), 4);
  return w + data;
}

inline EmbeddingSequence make_sequence(RowMatrixXf values, double hop_s = 0.02) {
  EmbeddingSequence e;
  e.duration_s = static_cast<double>(values.rows()) * hop_s;
  e.values = std::move(values);
  e.hop_s = hop_s;
  e.recording_id = "r";
  return e;
}

}  // namespace alsed::test

#endif  // ALSED_TESTS_HELPERS_HPP_
