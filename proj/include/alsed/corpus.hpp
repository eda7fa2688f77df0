// include/alsed/corpus.hpp

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


// Corpus manifests and the preparation step that turns audio into frozen
// embedding sequences.

#ifndef ALSED_CORPUS_HPP_
#define ALSED_CORPUS_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "alsed/audio.hpp"
#include "alsed/embeddings.hpp"
#include "alsed/features.hpp"
#include "alsed/segmentation.hpp"
#include "alsed/synthdata.hpp"

namespace alsed {

enum class RecordingRole { kTrain, kTest };

std::string_view to_string(RecordingRole role);
RecordingRole recording_role_from_string(std::string_view name);

struct CorpusEntry {
  std::string recording_id;
  std::filesystem::path file;  // relative paths resolve against the manifest
  double duration_s = 0.0;
  RecordingRole role = RecordingRole::kTrain;
};

/// {"sample_rate", "classes": [...], "recordings": [{"id", "file",
/// "duration_s", "role", "events": [{"class", "onset_s", "offset_s"}]}]}.
/// Recordings without an "events" key have no ground truth.
struct CorpusManifest {
  int sample_rate = 16000;
  std::vector<std::string> class_names;
  std::vector<CorpusEntry> recordings;
  GroundTruth truth;
};

nlohmann::json to_json(const CorpusManifest& manifest);
CorpusManifest corpus_manifest_from_json(const nlohmann::json& doc);
CorpusManifest read_corpus_manifest(const std::filesystem::path& path);
void write_corpus_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

/// Writes 16-bit WAVs under dir/audio and dir/manifest.json.
CorpusManifest write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& train,
                                  const SynthCorpus& test);

struct PreparedRecording {
  std::shared_ptr<const EmbeddingSequence> embedding;
  std::shared_ptr<const LogMelSpectrogram> features;  // kept on request only

  const std::string& recording_id() const { return embedding->recording_id; }
  double duration_s() const { return embedding->duration_s; }
  double hop_s() const { return embedding->hop_s; }
  /// Shares ownership with `embedding`.
  std::shared_ptr<const RowMatrixXf> frames() const {
    return {embedding, &embedding->values};
  }
};

struct PreparedCorpus {
  std::vector<std::string> class_names;
  std::vector<PreparedRecording> recordings;
  GroundTruth truth;

  double total_duration_s() const;
  /// Throws NotFoundError.
  const PreparedRecording& find(const std::string& recording_id) const;
  std::map<std::string, double> durations() const;
};

struct PreparedCorpora {
  PreparedCorpus train;
  PreparedCorpus test;
};

/// Features and embeddings for both roles. Random-projection statistics are
/// fitted on the training role only.
PreparedCorpora prepare_corpora(std::span<const AudioClip> train, std::span<const AudioClip> test,
                                const std::vector<std::string>& class_names,
                                const GroundTruth& truth, const FeatureConfig& features,
                                const EmbeddingConfig& embedding, bool keep_features = false);

/// Loads every recording of a manifest, naming the recording on failure.
std::vector<AudioClip> load_corpus_audio(const CorpusManifest& manifest,
                                         const std::filesystem::path& base, RecordingRole role);

/// On-disk preparation: dir/embeddings/<id>.emb (EMB1), dir/embeddings.json
/// (precomputed-provider manifest), dir/manifest.json, and dir/features/<id>.lmel
/// for recordings whose features were kept.
void write_prepared(const std::filesystem::path& dir, const CorpusManifest& manifest,
                    const std::filesystem::path& manifest_base, const PreparedCorpora& corpora);
PreparedCorpora load_prepared(const std::filesystem::path& dir);

/// Candidate segments of every recording, ids dense in recording order. With
/// `whole_recordings` each recording is a single candidate.
std::vector<CandidateSegment> build_candidates(const PreparedCorpus& corpus,
                                               const SegmentationConfig& config,
                                               bool whole_recordings = false);

}  // namespace alsed

#endif  // ALSED_CORPUS_HPP_
