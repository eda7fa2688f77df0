// include/alsed/project_store.hpp

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

// File-backed annotation projects. Every method returns the JSON document the
// HTTP layer sends back; errors are thrown as InputError / NotFoundError /
// ConflictError.
//
// Project directory layout:
//   config.json        name and project config
//   recordings.json    corpus manifest of registered recordings
//   audio/             uploaded WAV files
//   prepared/          embeddings, features and manifest after prepare
//   segments.csv       candidate segment table
//   state.json         iteration, open batch, last trained round
//   annotations.jsonl  append-only annotation log, fsynced per entry
//   model.sedm         latest model checkpoint
//   metrics.json       ER per training round

#ifndef ALSED_PROJECT_STORE_HPP_
#define ALSED_PROJECT_STORE_HPP_

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "alsed/corpus.hpp"
#include "alsed/error.hpp"

namespace alsed {

enum class JobState { kIdle, kQueued, kRunning, kFailed };
std::string_view to_string(JobState state);

struct Project;

/// Raised by next_batch when the open batch already has annotations; carries
/// the batch so a client can resume it.
class OpenBatchConflict : public ConflictError {
 public:
  OpenBatchConflict(const std::string& what, nlohmann::json batch)
      : ConflictError(what), batch_(std::move(batch)) {}
  const nlohmann::json& batch() const { return batch_; }

 private:
  nlohmann::json batch_;
};

class ProjectStore {
 public:
  /// Loads every project under `root`, replaying annotation logs and
  /// resuming any training a previous process did not finish.
  explicit ProjectStore(std::filesystem::path root);
  ~ProjectStore();

  ProjectStore(const ProjectStore&) = delete;
  ProjectStore& operator=(const ProjectStore&) = delete;

  /// {"name", "config": {...}, "system": k}; "system" applies a preset row.
  nlohmann::json create_project(const nlohmann::json& doc);
  nlohmann::json list_projects() const;

  /// {"recordings": [{"id", "path", "role", "events"}]} or {"manifest": path}.
  nlohmann::json add_recordings(const std::string& project, const nlohmann::json& doc);
  /// Stores uploaded WAV bytes under the project directory.
  nlohmann::json add_recording_wav(const std::string& project, const std::string& recording_id,
                                   RecordingRole role, std::string_view wav_bytes);

  nlohmann::json prepare(const std::string& project);

  /// Waits up to `wait` for a pending training job, then returns the open
  /// batch (while none of it is annotated) or selects a new one.
  nlohmann::json next_batch(const std::string& project,
                            std::chrono::milliseconds wait = std::chrono::minutes(10));
  nlohmann::json abandon_batch(const std::string& project);
  /// {"segment_id", "labels": [names], "events": [...], "annotator"}
  nlohmann::json submit_annotation(const std::string& project, const nlohmann::json& doc);
  nlohmann::json request_training(const std::string& project);

  nlohmann::json status(const std::string& project) const;
  nlohmann::json metrics(const std::string& project) const;

  /// 16-bit WAV of the segment padded by `context_s` on both sides, clamped
  /// to the recording.
  std::string segment_audio(const std::string& segment_id, double context_s) const;
  /// {"T", "B", "hop_s", "start_s", "values"} with row-major log-mel values.
  nlohmann::json segment_mel(const std::string& segment_id, double context_s) const;

  /// Blocks until no training job is queued or running.
  void wait_for_training(const std::string& project) const;

 private:
  Project& find(const std::string& project) const;
  std::pair<Project&, int> find_segment(const std::string& segment_id) const;
  void load_project(const std::filesystem::path& dir);
  void enqueue_training(Project& p);
  void worker_loop();

  std::filesystem::path root_;
  mutable std::mutex projects_mu_;
  std::map<std::string, std::unique_ptr<Project>> projects_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Project*> queue_;
  bool stopping_ = false;
  std::thread worker_;
};

/// "p0003_17" -> ("p0003", 17); throws NotFoundError on malformed ids.
std::pair<std::string, int> parse_segment_id(std::string_view id);
std::string make_segment_id(const std::string& project, int index);

}  // namespace alsed

#endif  // ALSED_PROJECT_STORE_HPP_
