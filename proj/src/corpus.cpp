// src/corpus.cpp

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


#include "alsed/corpus.hpp"

#include <filesystem>

#include "alsed/binary_io.hpp"
#include "alsed/error.hpp"

namespace alsed {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(RecordingRole role) {
  return role == RecordingRole::kTrain ? "train" : "test";
}

RecordingRole recording_role_from_string(std::string_view name) {
  if (name == "train") return RecordingRole::kTrain;
  if (name == "test") return RecordingRole::kTest;
  throw InputError("unknown recording role: " + std::string(name));
}

json to_json(const CorpusManifest& manifest) {
  json recs = json::array();
  for (const auto& r : manifest.recordings) {
    json j = {{"id", r.recording_id},
              {"file", r.file.generic_string()},
              {"duration_s", r.duration_s},
              {"role", std::string(to_string(r.role))}};
    auto it = manifest.truth.events.find(r.recording_id);
    if (it != manifest.truth.events.end()) {
      json events = json::array();
      for (const auto& e : it->second)
        events.push_back({{"class", manifest.class_names.at(static_cast<std::size_t>(e.class_id))},
                          {"onset_s", e.onset_s},
                          {"offset_s", e.offset_s}});
      j["events"] = std::move(events);
    }
    recs.push_back(std::move(j));
  }
  return {{"sample_rate", manifest.sample_rate},
          {"classes", manifest.class_names},
          {"recordings", std::move(recs)}};
}

static int class_index(const std::vector<std::string>& classes, const std::string& name) {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == name) return static_cast<int>(i);
  throw InputError("unknown class: " + name);
}

CorpusManifest corpus_manifest_from_json(const json& doc) {
  CorpusManifest m;
  try {
    m.sample_rate = doc.value("sample_rate", 16000);
    m.class_names = doc.at("classes").get<std::vector<std::string>>();
    for (const auto& r : doc.at("recordings")) {
      CorpusEntry e;
      e.recording_id = r.at("id").get<std::string>();
      e.file = r.at("file").get<std::string>();
      e.duration_s = r.value("duration_s", 0.0);
      e.role = recording_role_from_string(r.value("role", std::string("train")));
      if (r.contains("events")) {
        auto& events = m.truth.events[e.recording_id];
        for (const auto& ev : r.at("events"))
          events.push_back({class_index(m.class_names, ev.at("class").get<std::string>()),
                            ev.at("onset_s").get<double>(), ev.at("offset_s").get<double>()});
      }
      m.recordings.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed corpus manifest: ") + e.what());
  }
  return m;
}

CorpusManifest read_corpus_manifest(const fs::path& path) {
  try {
    return corpus_manifest_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_corpus_manifest(const fs::path& path, const CorpusManifest& manifest) {
  write_file_atomic(path, to_json(manifest).dump(2) + "\n");
}

CorpusManifest write_synth_corpus(const fs::path& dir, const SynthCorpus& train,
                                  const SynthCorpus& test) {
  fs::create_directories(dir / "audio");
  CorpusManifest m;
  m.class_names = train.class_names;
  auto add = [&](const SynthCorpus& corpus, RecordingRole role) {
    for (const auto& clip : corpus.clips) {
      const fs::path rel = fs::path("audio") / (clip.recording_id + ".wav");
      write_wav16(dir / rel, clip);
      m.sample_rate = clip.sample_rate;
      m.recordings.push_back({clip.recording_id, rel, clip.duration_s(), role});
      m.truth.events[clip.recording_id] = corpus.truth.of(clip.recording_id);
    }
  };
  add(train, RecordingRole::kTrain);
  add(test, RecordingRole::kTest);
  write_corpus_manifest(dir / "manifest.json", m);
  return m;
}

double PreparedCorpus::total_duration_s() const {
  double total = 0.0;
  for (const auto& r : recordings) total += r.duration_s();
  return total;
}

const PreparedRecording& PreparedCorpus::find(const std::string& recording_id) const {
  for (const auto& r : recordings)
    if (r.recording_id() == recording_id) return r;
  throw NotFoundError("unknown recording: " + recording_id);
}

std::map<std::string, double> PreparedCorpus::durations() const {
  std::map<std::string, double> out;
  for (const auto& r : recordings) out[r.recording_id()] = r.duration_s();
  return out;
}

namespace {

void fill_truth(PreparedCorpus& corpus, const GroundTruth& truth) {
  for (const auto& r : corpus.recordings) {
    auto it = truth.events.find(r.recording_id());
    if (it != truth.events.end()) corpus.truth.events[r.recording_id()] = it->second;
  }
}

}  // namespace

PreparedCorpora prepare_corpora(std::span<const AudioClip> train, std::span<const AudioClip> test,
                                const std::vector<std::string>& class_names,
                                const GroundTruth& truth, const FeatureConfig& features,
                                const EmbeddingConfig& embedding, bool keep_features) {
  if (train.empty()) throw InputError("no training recordings");
  const int rate = train.front().sample_rate;
  auto featurize = [&](std::span<const AudioClip> clips) {
    std::vector<LogMelSpectrogram> out;
    out.reserve(clips.size());
    for (const auto& c : clips) {
      if (c.sample_rate != rate)
        throw InputError(c.recording_id + ": sample rate differs within the project");
      out.push_back(compute_logmel(c, features));
    }
    return out;
  };
  const auto train_mels = featurize(train);
  const auto test_mels = featurize(test);
  const auto provider = make_embedding_provider(embedding, features.n_bands, train_mels);

  PreparedCorpora out;
  auto fill = [&](PreparedCorpus& corpus, const std::vector<LogMelSpectrogram>& mels) {
    corpus.class_names = class_names;
    for (const auto& m : mels) {
      PreparedRecording r;
      r.embedding = std::make_shared<const EmbeddingSequence>(provider->embed(m));
      if (keep_features) r.features = std::make_shared<const LogMelSpectrogram>(m);
      corpus.recordings.push_back(std::move(r));
    }
    fill_truth(corpus, truth);
  };
  fill(out.train, train_mels);
  fill(out.test, test_mels);
  return out;
}

std::vector<AudioClip> load_corpus_audio(const CorpusManifest& manifest, const fs::path& base,
                                         RecordingRole role) {
  std::vector<AudioClip> clips;
  for (const auto& r : manifest.recordings) {
    if (r.role != role) continue;
    const fs::path p = r.file.is_relative() ? base / r.file : r.file;
    try {
      clips.push_back(load_audio(p, r.recording_id));
    } catch (const Error& e) {
      throw InputError("recording " + r.recording_id + ": " + e.what());
    }
  }
  return clips;
}

void write_prepared(const fs::path& dir, const CorpusManifest& manifest,
                    const fs::path& manifest_base, const PreparedCorpora& corpora) {
  fs::create_directories(dir / "embeddings");
  json files = json::object();
  int dim = 0;
  double hop = 0.02;
  for (const auto* corpus : {&corpora.train, &corpora.test})
    for (const auto& r : corpus->recordings) {
      const fs::path rel = fs::path("embeddings") / (r.recording_id() + ".emb");
      write_file_atomic(dir / rel, encode_embedding(*r.embedding));
      files[r.recording_id()] = rel.generic_string();
      dim = static_cast<int>(r.embedding->dim());
      hop = r.hop_s();
      if (r.features) {
        fs::create_directories(dir / "features");
        write_file_atomic(dir / "features" / (r.recording_id() + ".lmel"),
                          encode_logmel(*r.features));
      }
    }
  write_file_atomic(dir / "embeddings.json",
                    json{{"dim", dim}, {"hop_s", hop}, {"files", files}}.dump(2) + "\n");
  CorpusManifest m = manifest;
  for (auto& r : m.recordings)
    if (r.file.is_relative()) r.file = fs::absolute(manifest_base / r.file);
  write_corpus_manifest(dir / "manifest.json", m);
}

PreparedCorpora load_prepared(const fs::path& dir) {
  const CorpusManifest manifest = read_corpus_manifest(dir / "manifest.json");
  json index;
  try {
    index = json::parse(read_file(dir / "embeddings.json"));
  } catch (const json::exception& e) {
    throw InputError("bad embeddings.json in " + dir.string() + ": " + e.what());
  }
  const int dim = index.at("dim").get<int>();
  const double hop = index.value("hop_s", 0.02);
  PreparedCorpora out;
  out.train.class_names = out.test.class_names = manifest.class_names;
  for (const auto& entry : manifest.recordings) {
    const auto& files = index.at("files");
    if (!files.contains(entry.recording_id))
      throw InputError(entry.recording_id + ": not prepared");
    auto emb = decode_embedding(read_file(dir / files.at(entry.recording_id).get<std::string>()),
                                entry.recording_id);
    if (emb.dim() != dim) throw InputError(entry.recording_id + ": embedding dimension mismatch");
    emb.hop_s = hop;
    emb.duration_s = entry.duration_s;
    PreparedRecording r;
    r.embedding = std::make_shared<const EmbeddingSequence>(std::move(emb));
    const fs::path lmel = dir / "features" / (entry.recording_id + ".lmel");
    if (fs::exists(lmel)) {
      auto spec = decode_logmel(read_file(lmel), entry.recording_id);
      spec.hop_s = hop;
      spec.duration_s = entry.duration_s;
      r.features = std::make_shared<const LogMelSpectrogram>(std::move(spec));
    }
    (entry.role == RecordingRole::kTrain ? out.train : out.test).recordings.push_back(std::move(r));
  }
  fill_truth(out.train, manifest.truth);
  fill_truth(out.test, manifest.truth);
  return out;
}

std::vector<CandidateSegment> build_candidates(const PreparedCorpus& corpus,
                                               const SegmentationConfig& config,
                                               bool whole_recordings) {
  std::vector<CandidateSegment> out;
  for (const auto& r : corpus.recordings) {
    const int first = static_cast<int>(out.size());
    auto segs = whole_recordings ? segments_from_boundaries(*r.embedding, {}, first)
                                 : segment_recording(*r.embedding, config, first);
    for (auto& s : segs) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace alsed
