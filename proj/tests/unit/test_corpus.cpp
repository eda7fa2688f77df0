// tests/unit/test_corpus.cpp

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

#include <fstream>

#include "alsed/corpus.hpp"
#include "alsed/error.hpp"
#include "helpers.hpp"

using namespace alsed;

namespace {

GeneratorSpec tiny(std::uint64_t seed, int n, const std::string& prefix) {
  auto spec = rare_and_dense_presets().first;
  spec.seed = seed;
  spec.n_recordings = n;
  spec.recording_len_s = 6.0;
  spec.events_per_minute = 10.0;
  spec.id_prefix = prefix;
  return spec;
}

EmbeddingConfig small_embedding() {
  EmbeddingConfig e;
  e.dim = 16;
  e.seed = 3;
  return e;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("manifest JSON round trip") {
  nlohmann::json doc = {
      {"sample_rate", 8000},
      {"classes", {"a", "b"}},
      {"recordings",
       {{{"id", "x"}, {"file", "x.wav"}, {"role", "test"},
         {"events", {{{"class", "b"}, {"onset_s", 1.0}, {"offset_s", 2.0}}}}},
        {{"id", "y"}, {"file", "y.wav"}}}}};
  const auto m = corpus_manifest_from_json(doc);
  CHECK(m.sample_rate == 8000);
  REQUIRE(m.recordings.size() == 2);
  CHECK(m.recordings[0].role == RecordingRole::kTest);
  CHECK(m.recordings[1].role == RecordingRole::kTrain);
  CHECK(m.truth.of("x") == std::vector<Event>{{1, 1.0, 2.0}});
  CHECK(m.truth.events.count("y") == 0);
  const auto back = corpus_manifest_from_json(to_json(m));
  CHECK(back.truth.events == m.truth.events);
  CHECK(back.recordings[0].file == m.recordings[0].file);

  doc["recordings"][0]["events"][0]["class"] = "zzz";
  CHECK_THROWS_AS(corpus_manifest_from_json(doc), InputError);
  CHECK_THROWS_AS(corpus_manifest_from_json(nlohmann::json::object()), InputError);
}

TEST_CASE("synthetic corpus written, prepared, stored and reloaded") {
  test::TempDir dir("corpus");
  const auto train = generate(tiny(1, 3, "tr")), test_c = generate(tiny(2, 2, "te"));
  const auto manifest = write_synth_corpus(dir.path() / "c", train, test_c);
  CHECK(manifest.recordings.size() == 5);

  const auto reread = read_corpus_manifest(dir.path() / "c" / "manifest.json");
  const auto tr = load_corpus_audio(reread, dir.path() / "c", RecordingRole::kTrain);
  const auto te = load_corpus_audio(reread, dir.path() / "c", RecordingRole::kTest);
  REQUIRE(tr.size() == 3);
  REQUIRE(te.size() == 2);
  CHECK((tr[0].samples - train.clips[0].samples).cwiseAbs().maxCoeff() <= 1.0f / 32768.0f);

  const auto corpora = prepare_corpora(tr, te, reread.class_names, reread.truth, FeatureConfig{},
                                       small_embedding(), true);
  CHECK(corpora.train.recordings.size() == 3);
  CHECK(corpora.test.recordings.size() == 2);
  CHECK(corpora.train.recordings[0].embedding->dim() == 16);
  CHECK(corpora.train.total_duration_s() == doctest::Approx(18.0));
  REQUIRE(corpora.train.recordings[0].features);

  write_prepared(dir.path() / "p", reread, dir.path() / "c", corpora);
  const auto loaded = load_prepared(dir.path() / "p");
  REQUIRE(loaded.train.recordings.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(loaded.train.recordings[i].embedding->values ==
          corpora.train.recordings[i].embedding->values);
    CHECK(loaded.train.recordings[i].features->values ==
          corpora.train.recordings[i].features->values);
  }
  CHECK(loaded.test.truth.events == corpora.test.truth.events);
  CHECK_THROWS_AS(loaded.train.find("nope"), NotFoundError);
}

TEST_CASE("standardization uses training recordings only") {
  const auto train = generate(tiny(1, 2, "tr")), other = generate(tiny(9, 2, "te"));
  const auto a = prepare_corpora(train.clips, other.clips, train.class_names, {}, {},
                                 small_embedding());
  const auto b = prepare_corpora(train.clips, {}, train.class_names, {}, {}, small_embedding());
  CHECK(a.train.recordings[0].embedding->values == b.train.recordings[0].embedding->values);
}

TEST_CASE("corrupted audio names the recording") {
  test::TempDir dir("bad");
  std::ofstream(dir.path() / "broken.wav") << "garbage";
  CorpusManifest m;
  m.class_names = {"a"};
  m.recordings.push_back({"broken_rec", "broken.wav", 0.0, RecordingRole::kTrain});
  try {
    load_corpus_audio(m, dir.path(), RecordingRole::kTrain);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("broken_rec") != std::string::npos);
  }
}

TEST_CASE("candidates: one per change-free recording, ids dense") {
  PreparedCorpus corpus;
  corpus.class_names = {"a"};
  for (int i = 0; i < 10; ++i) {
    auto e = std::make_shared<EmbeddingSequence>(
        test::make_sequence(RowMatrixXf::Constant(1500, 4, 1.0f)));
    e->recording_id = "r" + std::to_string(i);
    corpus.recordings.push_back({e, nullptr});
  }
  const auto segs = build_candidates(corpus, SegmentationConfig{});
  REQUIRE(segs.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(segs[i].segment_id == i);
    CHECK(segs[i].duration_s() == doctest::Approx(30.0));
  }
  const auto again = build_candidates(corpus, SegmentationConfig{});
  for (int i = 0; i < 10; ++i) CHECK(again[i].end_frame == segs[i].end_frame);
  SegmentationConfig fixed;
  fixed.mode = SegmentationMode::kFixed;
  CHECK(build_candidates(corpus, fixed).size() == 150);
  CHECK(build_candidates(corpus, fixed, true).size() == 10);
}

}  // TEST_SUITE
