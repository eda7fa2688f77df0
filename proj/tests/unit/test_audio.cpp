// tests/unit/test_audio.cpp

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

#include <doctest.h>

#include <cmath>

#include "alsed/audio.hpp"
#include "alsed/error.hpp"
#include "helpers.hpp"

using namespace alsed;

TEST_SUITE("audio") {

TEST_CASE("one second of 16-bit mono at 16 kHz") {
  std::vector<std::int32_t> s(16000, 1000);
  const auto clip = decode_wav(test::make_pcm_wav(s, 1, 16000, 16), "a");
  CHECK(clip.samples.size() == 16000);
  CHECK(clip.sample_rate == 16000);
  CHECK(clip.duration_s() == doctest::Approx(1.0));
  CHECK(clip.samples[5] == doctest::Approx(1000.0 / 32768.0));
}

TEST_CASE("int16 extremes map by value / 32768") {
  const auto clip = decode_wav(test::make_pcm_wav({-32768, 32767, 0, 16384}, 1, 8000, 16), "a");
  CHECK(clip.samples[0] == -1.0f);
  CHECK(clip.samples[1] == static_cast<float>(32767.0 / 32768.0));
  CHECK(clip.samples[2] == 0.0f);
  CHECK(clip.samples[3] == 0.5f);
}

TEST_CASE("multichannel keeps channel 0") {
  std::vector<std::int32_t> s;
  for (int t = 0; t < 100; ++t)
    for (int ch = 0; ch < 4; ++ch) s.push_back(ch == 0 ? t * 10 : -30000);
  const auto clip = decode_wav(test::make_pcm_wav(s, 4, 16000, 16), "a");
  REQUIRE(clip.samples.size() == 100);
  for (int t = 0; t < 100; ++t) CHECK(clip.samples[t] == static_cast<float>(t * 10 / 32768.0));
}

TEST_CASE("24-bit and 8-bit PCM") {
  const auto c24 = decode_wav(test::make_pcm_wav({-8388608, 4194304}, 1, 16000, 24), "a");
  CHECK(c24.samples[0] == -1.0f);
  CHECK(c24.samples[1] == 0.5f);
  // 8-bit is unsigned with 128 as zero
  const auto c8 = decode_wav(test::make_pcm_wav({0, 128, 192}, 1, 16000, 8), "a");
  CHECK(c8.samples[0] == -1.0f);
  CHECK(c8.samples[1] == 0.0f);
  CHECK(c8.samples[2] == 0.5f);
}

TEST_CASE("encode then decode is exact on the int16 grid") {
  Eigen::VectorXf x(64);
  for (int i = 0; i < 64; ++i) x[i] = static_cast<float>((i * 977 % 65536) - 32768) / 32768.0f;
  const auto clip = decode_wav(encode_wav16(x, 22050), "a");
  CHECK(clip.sample_rate == 22050);
  CHECK((clip.samples - x).cwiseAbs().maxCoeff() == 0.0f);
  CHECK(encode_wav16(x, 22050).size() == 44 + 2 * 64);
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(decode_wav("RIFF0000WAVE", "bad"), InputError);
  CHECK_THROWS_AS(decode_wav("not a wav file at all, no sir", "bad"), InputError);
  std::string w = test::make_pcm_wav({1, 2, 3}, 1, 16000, 16);
  w.resize(w.size() - 4);  // truncated data chunk
  CHECK_NOTHROW(decode_wav(w, "short"));
}

}  // TEST_SUITE
