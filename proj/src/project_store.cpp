// src/project_store.cpp

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

#include "alsed/project_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>

#include "alsed/audio.hpp"
#include "alsed/binary_io.hpp"
#include "alsed/error.hpp"
#include "alsed/experiment.hpp"
#include "alsed/text_io.hpp"

namespace alsed {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Project {
  std::string id;
  fs::path dir;

  mutable std::shared_mutex mu;  // guards everything up to job_mu
  std::string name;
  ProjectConfig config;
  CorpusManifest registry;
  std::shared_ptr<const PreparedCorpus> train;
  std::shared_ptr<const PreparedCorpus> test;
  std::unique_ptr<ActiveLearningSession> session;
  int trained_round = 0;
  json history = json::array();

  mutable std::mutex job_mu;
  mutable std::condition_variable job_cv;
  JobState job = JobState::kIdle;
  bool rerun = false;
  std::string job_error;
  std::vector<std::string> job_trace;

  void set_job(JobState s) {
    job = s;
    job_trace.emplace_back(to_string(s));
    if (job_trace.size() > 32) job_trace.erase(job_trace.begin());
  }
};

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::kIdle: return "idle";
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kFailed: return "failed";
  }
  return "idle";
}

std::string make_segment_id(const std::string& project, int index) {
  return project + "_" + std::to_string(index);
}

std::pair<std::string, int> parse_segment_id(std::string_view id) {
  const auto cut = id.rfind('_');
  if (cut == std::string_view::npos || cut == 0 || cut + 1 == id.size())
    throw NotFoundError("malformed segment id " + std::string(id));
  int index = 0;
  for (char c : id.substr(cut + 1)) {
    if (c < '0' || c > '9' || index > 100000000)
      throw NotFoundError("malformed segment id " + std::string(id));
    index = index * 10 + (c - '0');
  }
  return {std::string(id.substr(0, cut)), index};
}

namespace {

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

int class_id(const ProjectConfig& config, const json& v) {
  if (v.is_number_integer()) {
    const int c = v.get<int>();
    if (c < 0 || c >= static_cast<int>(config.classes.size()))
      throw InputError("unknown class id " + std::to_string(c));
    return c;
  }
  if (!v.is_string()) throw InputError("class must be a name or an index");
  const auto name = v.get<std::string>();
  auto it = std::find(config.classes.begin(), config.classes.end(), name);
  if (it == config.classes.end()) throw InputError("unknown class " + name);
  return static_cast<int>(it - config.classes.begin());
}

std::vector<Event> events_from_json(const ProjectConfig& config, const json& arr) {
  std::vector<Event> out;
  if (!arr.is_array()) throw InputError("events must be an array");
  for (const auto& e : arr) {
    Event ev{class_id(config, e.at("class")), e.at("onset_s").get<double>(),
             e.at("offset_s").get<double>()};
    if (!(ev.offset_s > ev.onset_s)) throw InputError("event offset must follow its onset");
    out.push_back(ev);
  }
  return out;
}

json events_to_json(const ProjectConfig& config, const std::vector<Event>& events) {
  json arr = json::array();
  for (const auto& e : events)
    arr.push_back({{"class", config.classes[static_cast<std::size_t>(e.class_id)]},
                   {"onset_s", e.onset_s},
                   {"offset_s", e.offset_s}});
  return arr;
}

json labels_to_json(const ProjectConfig& config, const LabelSet& labels) {
  json arr = json::array();
  for (int c : labels) arr.push_back(config.classes[static_cast<std::size_t>(c)]);
  return arr;
}

json er_to_json(const ErReport& er) {
  const double v = er.error_rate();
  return {{"S", er.substitutions},
          {"D", er.deletions},
          {"I", er.insertions},
          {"N", er.reference_active},
          {"ER", std::isfinite(v) ? json(v) : json(nullptr)}};
}

bool has_ground_truth(const Project& p) {
  if (!p.test || p.test->recordings.empty()) return false;
  for (const auto& r : p.test->recordings)
    if (!p.test->truth.events.count(r.recording_id())) return false;
  return true;
}

void save_state(const Project& p) {
  json open = json::array();
  int iteration = 1;
  if (p.session) {
    for (int id : p.session->state().selected_in_batch) open.push_back(id);
    iteration = p.session->state().iteration;
  }
  const json doc = {{"prepared", p.session != nullptr},
                    {"iteration", iteration},
                    {"open_batch", open},
                    {"trained_round", p.trained_round}};
  write_file_atomic(p.dir / "state.json", doc.dump(2) + "\n");
}

void save_registry(const Project& p) { write_corpus_manifest(p.dir / "recordings.json", p.registry); }

json segment_json(const Project& p, int index) {
  const auto& s = p.session->candidates()[static_cast<std::size_t>(index)];
  const std::string sid = make_segment_id(p.id, index);
  return {{"id", sid},
          {"index", index},
          {"recording_id", s.recording_id},
          {"start_s", s.start_s},
          {"end_s", s.end_s},
          {"duration_s", s.duration_s()},
          {"annotated", p.session->annotations().count(index) != 0},
          {"audio", "/segments/" + sid + "/audio"},
          {"mel", "/segments/" + sid + "/mel"}};
}

json batch_json(const Project& p, const std::vector<int>& ids, bool exhausted) {
  json segs = json::array();
  for (int id : ids) segs.push_back(segment_json(p, id));
  return {{"project", p.id},
          {"iteration", p.session->state().iteration},
          {"strategy", std::string(to_string(p.config.strategy))},
          {"classes", p.config.classes},
          {"labels", p.config.labels == LabelMode::kWeak ? "weak" : "strong"},
          {"exhausted", exhausted},
          {"segments", segs}};
}

const CorpusEntry& registry_entry(const Project& p, const std::string& recording_id) {
  for (const auto& r : p.registry.recordings)
    if (r.recording_id == recording_id) return r;
  throw NotFoundError("unknown recording " + recording_id);
}

fs::path resolve(const Project& p, const fs::path& file) {
  return file.is_relative() ? p.dir / file : file;
}

void require_prepared(const Project& p) {
  if (!p.session) throw ConflictError("project " + p.id + " is not prepared");
}

void add_entry(Project& p, CorpusEntry entry, std::optional<std::vector<Event>> events) {
  if (entry.recording_id.empty() || entry.recording_id.find('/') != std::string::npos)
    throw InputError("invalid recording id '" + entry.recording_id + "'");
  for (const auto& r : p.registry.recordings)
    if (r.recording_id == entry.recording_id)
      throw ConflictError("recording " + entry.recording_id + " is already registered");
  if (events) p.registry.truth.events[entry.recording_id] = std::move(*events);
  p.registry.recordings.push_back(std::move(entry));
}

/// Registering audio invalidates a preparation that nobody has annotated yet.
void begin_registry_change(Project& p) {
  if (p.session && (!p.session->annotations().empty() || p.session->batch_open()))
    throw ConflictError("project " + p.id + " already has annotations");
  if (p.session) {
    p.session.reset();
    p.train.reset();
    p.test.reset();
    save_state(p);
  }
}

std::map<int, Annotation> replay_log(const Project& p) {
  std::map<int, Annotation> out;
  std::ifstream in(p.dir / "annotations.jsonl");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json e;
    try {
      e = json::parse(lines[i]);
    } catch (const json::exception&) {
      if (i + 1 == lines.size()) break;  // torn final write
      throw InputError(p.id + ": corrupt annotation log line " + std::to_string(i + 1));
    }
    Annotation a;
    for (const auto& c : e.at("labels")) a.labels.insert(class_id(p.config, c));
    if (e.contains("events")) a.events = events_from_json(p.config, e.at("events"));
    out[e.at("segment").get<int>()] = std::move(a);
  }
  return out;
}

void build_session(Project& p, PreparedCorpora corpora) {
  p.train = std::make_shared<const PreparedCorpus>(std::move(corpora.train));
  p.test = std::make_shared<const PreparedCorpus>(std::move(corpora.test));
  p.session = std::make_unique<ActiveLearningSession>(p.config, p.train);
}

}  // namespace

ProjectStore::ProjectStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root_))
    if (e.is_directory() && fs::exists(e.path() / "config.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  worker_ = std::thread([this] { worker_loop(); });
  for (const auto& d : dirs) load_project(d);
}

ProjectStore::~ProjectStore() {
  {
    std::lock_guard<std::mutex> l(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void ProjectStore::load_project(const fs::path& dir) {
  auto p = std::make_unique<Project>();
  p->id = dir.filename().string();
  p->dir = dir;
  const json cfg = parse_json_file(dir / "config.json");
  p->name = cfg.value("name", p->id);
  p->config = project_config_from_json(cfg.at("config"));
  p->registry = read_corpus_manifest(dir / "recordings.json");
  json state = {{"prepared", false}};
  if (fs::exists(dir / "state.json")) state = parse_json_file(dir / "state.json");
  if (fs::exists(dir / "metrics.json")) p->history = parse_json_file(dir / "metrics.json").at("history");
  bool needs_training = false;
  if (state.value("prepared", false)) {
    build_session(*p, load_prepared(dir / "prepared"));
    p->trained_round = state.value("trained_round", 0);
    p->session->restore(state.at("iteration").get<int>(),
                        state.at("open_batch").get<std::vector<int>>(), replay_log(*p));
    if (fs::exists(dir / "model.sedm"))
      p->session->set_model(decode_checkpoint(read_file(dir / "model.sedm")));
    if (p->session->batch_complete()) {
      p->session->commit_batch();
      save_state(*p);
    }
    needs_training = p->session->rounds() > p->trained_round;
  }
  Project& ref = *p;
  {
    std::lock_guard<std::mutex> l(projects_mu_);
    projects_[p->id] = std::move(p);
  }
  if (needs_training) enqueue_training(ref);
}

Project& ProjectStore::find(const std::string& project) const {
  std::lock_guard<std::mutex> l(projects_mu_);
  auto it = projects_.find(project);
  if (it == projects_.end()) throw NotFoundError("unknown project " + project);
  return *it->second;
}

std::pair<Project&, int> ProjectStore::find_segment(const std::string& segment_id) const {
  auto [pid, index] = parse_segment_id(segment_id);
  Project& p = find(pid);
  return {p, index};
}

json ProjectStore::create_project(const json& doc) {
  if (!doc.is_object()) throw InputError("project document must be an object");
  ProjectConfig config;
  try {
    const json& body = doc.contains("config") ? doc.at("config") : doc;
    config = project_config_from_json(body);
    if (doc.contains("system")) config = apply_system(config, doc.at("system").get<int>());
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed project document: ") + e.what());
  }
  if (config.classes.empty()) throw InputError("a project needs at least one class");
  config.validate();
  const std::string name = doc.value("name", std::string("project"));

  auto p = std::make_unique<Project>();
  {
    std::lock_guard<std::mutex> l(projects_mu_);
    for (int n = static_cast<int>(projects_.size()) + 1;; ++n) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "p%04d", n);
      if (!projects_.count(buf) && !fs::exists(root_ / buf)) {
        p->id = buf;
        break;
      }
    }
    p->dir = root_ / p->id;
    fs::create_directories(p->dir);
  }
  p->name = name;
  p->config = config;
  p->registry.class_names = config.classes;
  write_file_atomic(p->dir / "config.json",
                    json{{"name", name}, {"config", to_json(config)}}.dump(2) + "\n");
  save_registry(*p);
  save_state(*p);
  json out = {{"id", p->id}, {"name", name}, {"config", to_json(config)}};
  std::lock_guard<std::mutex> l(projects_mu_);
  projects_[p->id] = std::move(p);
  return out;
}

json ProjectStore::list_projects() const {
  json out = json::array();
  std::lock_guard<std::mutex> l(projects_mu_);
  for (const auto& [id, p] : projects_) out.push_back({{"id", id}, {"name", p->name}});
  return out;
}

json ProjectStore::add_recordings(const std::string& project, const json& doc) {
  Project& p = find(project);
  std::unique_lock lock(p.mu);
  begin_registry_change(p);
  const std::size_t before = p.registry.recordings.size();
  const auto saved = p.registry;
  try {
    if (doc.contains("manifest")) {
      const fs::path path = doc.at("manifest").get<std::string>();
      const CorpusManifest m = read_corpus_manifest(path);
      const fs::path base = fs::absolute(path).parent_path();
      for (const auto& r : m.recordings) {
        CorpusEntry e = r;
        if (e.file.is_relative()) e.file = base / e.file;
        std::optional<std::vector<Event>> events;
        if (auto it = m.truth.events.find(r.recording_id); it != m.truth.events.end()) {
          events.emplace();
          for (auto ev : it->second) {
            ev.class_id = class_id(p.config, m.class_names.at(static_cast<std::size_t>(ev.class_id)));
            events->push_back(ev);
          }
        }
        add_entry(p, std::move(e), std::move(events));
      }
    } else {
      const json& list = doc.contains("recordings") ? doc.at("recordings") : json::array({doc});
      for (const auto& r : list) {
        CorpusEntry e;
        e.recording_id = r.at("id").get<std::string>();
        e.file = r.at("path").get<std::string>();
        e.role = recording_role_from_string(r.value("role", std::string("train")));
        std::optional<std::vector<Event>> events;
        if (r.contains("events")) events = events_from_json(p.config, r.at("events"));
        add_entry(p, std::move(e), std::move(events));
      }
    }
  } catch (const json::exception& e) {
    p.registry = saved;
    throw InputError(std::string("malformed recordings document: ") + e.what());
  } catch (...) {
    p.registry = saved;
    throw;
  }
  save_registry(p);
  return {{"added", p.registry.recordings.size() - before},
          {"recordings", p.registry.recordings.size()}};
}

json ProjectStore::add_recording_wav(const std::string& project, const std::string& recording_id,
                                     RecordingRole role, std::string_view wav_bytes) {
  decode_wav(wav_bytes, recording_id);  // reject unreadable uploads early
  Project& p = find(project);
  std::unique_lock lock(p.mu);
  begin_registry_change(p);
  CorpusEntry e;
  e.recording_id = recording_id;
  e.file = fs::path("audio") / (recording_id + ".wav");
  e.role = role;
  add_entry(p, e, std::nullopt);
  fs::create_directories(p.dir / "audio");
  write_file_atomic(p.dir / e.file, wav_bytes);
  save_registry(p);
  return {{"added", 1}, {"recordings", p.registry.recordings.size()}};
}

json ProjectStore::prepare(const std::string& project) {
  Project& p = find(project);
  std::unique_lock lock(p.mu);
  auto summary = [&p] {
    return json{{"segments", p.session->candidates().size()},
                {"recordings",
                 {{"train", p.train->recordings.size()}, {"test", p.test->recordings.size()}}},
                {"total_duration_s", p.session->total_duration_s()}};
  };
  if (p.session && (!p.session->annotations().empty() || p.session->batch_open())) return summary();
  bool any_train = false;
  for (const auto& r : p.registry.recordings) any_train |= r.role == RecordingRole::kTrain;
  if (!any_train) throw InputError("project " + p.id + " has no training recordings");

  const auto train_clips = load_corpus_audio(p.registry, p.dir, RecordingRole::kTrain);
  const auto test_clips = load_corpus_audio(p.registry, p.dir, RecordingRole::kTest);
  std::map<std::string, double> durations;
  for (const auto* clips : {&train_clips, &test_clips})
    for (const auto& c : *clips) durations[c.recording_id] = c.duration_s();
  for (auto& r : p.registry.recordings) r.duration_s = durations.at(r.recording_id);
  p.registry.sample_rate = train_clips.front().sample_rate;
  auto corpora = prepare_corpora(train_clips, test_clips, p.config.classes, p.registry.truth,
                                 p.config.features, p.config.embedding, true);
  fs::remove_all(p.dir / "prepared");
  write_prepared(p.dir / "prepared", p.registry, p.dir, corpora);
  save_registry(p);
  build_session(p, std::move(corpora));

  std::ostringstream table;
  write_segment_table(table, p.session->candidates());
  write_file_atomic(p.dir / "segments.csv", table.str());
  fs::remove(p.dir / "annotations.jsonl");
  fs::remove(p.dir / "model.sedm");
  fs::remove(p.dir / "metrics.json");
  p.history = json::array();
  p.trained_round = 0;
  save_state(p);
  return summary();
}

json ProjectStore::next_batch(const std::string& project, std::chrono::milliseconds wait) {
  Project& p = find(project);
  {
    std::unique_lock<std::mutex> l(p.job_mu);
    const bool done = p.job_cv.wait_for(l, wait, [&p] {
      return p.job != JobState::kQueued && p.job != JobState::kRunning;
    });
    if (!done) throw ConflictError("training is still running");
  }
  std::unique_lock lock(p.mu);
  require_prepared(p);
  auto& s = *p.session;
  if (s.batch_open()) {
    const auto& open = s.state().selected_in_batch;
    json batch = batch_json(p, open, false);
    for (int id : open)
      if (s.annotations().count(id))
        throw OpenBatchConflict("the open batch is partially annotated", batch);
    return batch;
  }
  const auto result = s.next_batch();
  std::vector<int> ids;
  for (const auto& pick : result.picks) ids.push_back(pick.segment_id);
  save_state(p);
  return batch_json(p, ids, result.picks.empty() && result.exhausted);
}

json ProjectStore::abandon_batch(const std::string& project) {
  Project& p = find(project);
  std::unique_lock lock(p.mu);
  require_prepared(p);
  const int committed_before = static_cast<int>(p.session->state().annotated.size());
  p.session->abandon_batch();
  save_state(p);
  const bool train = static_cast<int>(p.session->state().annotated.size()) > committed_before;
  if (train) enqueue_training(p);
  return {{"abandoned", true}, {"iteration", p.session->state().iteration}, {"training", train}};
}

json ProjectStore::submit_annotation(const std::string& project, const json& doc) {
  Project& p = find(project);
  std::unique_lock lock(p.mu);
  require_prepared(p);
  int index = 0;
  Annotation a;
  std::string annotator;
  try {
    const json& sid = doc.at("segment_id");
    if (sid.is_number_integer()) {
      index = sid.get<int>();
    } else {
      auto [pid, i] = parse_segment_id(sid.get<std::string>());
      if (pid != p.id) throw NotFoundError("segment " + sid.get<std::string>() + " belongs to another project");
      index = i;
    }
    for (const auto& c : doc.value("labels", json::array())) a.labels.insert(class_id(p.config, c));
    if (doc.contains("events")) a.events = events_from_json(p.config, doc.at("events"));
    annotator = doc.value("annotator", std::string());
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed annotation: ") + e.what());
  }
  if (p.config.labels == LabelMode::kStrong) {
    // Weak labels follow from the events when only events were sent.
    for (const auto& e : a.events) a.labels.insert(e.class_id);
  }
  auto& s = *p.session;
  s.annotate(index, std::move(a));
  const Annotation& stored = s.annotations().at(index);
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  json entry = {{"ts", now},
                {"segment", index},
                {"labels", labels_to_json(p.config, stored.labels)},
                {"annotator", annotator}};
  if (!stored.events.empty()) entry["events"] = events_to_json(p.config, stored.events);
  append_file_durable(p.dir / "annotations.jsonl", entry.dump() + "\n");

  int remaining = 0;
  for (int id : s.state().selected_in_batch) remaining += s.annotations().count(id) ? 0 : 1;
  const bool complete = s.batch_complete();
  if (complete) {
    s.commit_batch();
    save_state(p);
    enqueue_training(p);
  }
  return {{"segment_id", make_segment_id(p.id, index)},
          {"accepted", true},
          {"remaining", remaining},
          {"batch_complete", complete}};
}

json ProjectStore::request_training(const std::string& project) {
  Project& p = find(project);
  {
    std::shared_lock lock(p.mu);
    require_prepared(p);
    if (p.session->state().annotated.empty())
      throw ConflictError("project " + p.id + " has no committed annotations");
  }
  enqueue_training(p);
  return status(project);
}

json ProjectStore::status(const std::string& project) const {
  Project& p = find(project);
  json out;
  {
    std::shared_lock lock(p.mu);
    out = {{"project", p.id},
           {"name", p.name},
           {"classes", p.config.classes},
           {"registered_recordings", p.registry.recordings.size()},
           {"prepared", p.session != nullptr},
           {"trained_round", p.trained_round}};
    if (p.session) {
      const auto& s = *p.session;
      int annotated = 0;
      for (int id : s.state().selected_in_batch) annotated += s.annotations().count(id) ? 1 : 0;
      out["segments"] = s.candidates().size();
      out["iteration"] = s.state().iteration;
      out["rounds"] = s.rounds();
      out["labeled_duration_s"] = s.labeled_duration_s();
      out["total_duration_s"] = s.total_duration_s();
      out["labeled_fraction"] = s.labeled_duration_s() / s.total_duration_s();
      out["exhausted"] = s.exhausted();
      out["batch"] = {{"open", s.batch_open()},
                      {"size", s.state().selected_in_batch.size()},
                      {"annotated", annotated}};
      out["model"] = s.model().has_value();
    }
  }
  std::lock_guard<std::mutex> l(p.job_mu);
  out["training"] = {{"state", std::string(to_string(p.job))},
                     {"error", p.job_error},
                     {"trace", p.job_trace}};
  return out;
}

json ProjectStore::metrics(const std::string& project) const {
  Project& p = find(project);
  std::shared_lock lock(p.mu);
  const bool gt = has_ground_truth(p);
  return {{"project", p.id},
          {"has_ground_truth", gt},
          {"history", gt ? p.history : json::array()}};
}

std::string ProjectStore::segment_audio(const std::string& segment_id, double context_s) const {
  auto [p, index] = find_segment(segment_id);
  if (!(context_s >= 0.0)) throw InputError("context must be non-negative");
  CandidateSegment seg;
  fs::path file;
  {
    std::shared_lock lock(p.mu);
    require_prepared(p);
    if (index < 0 || index >= static_cast<int>(p.session->candidates().size()))
      throw NotFoundError("unknown segment " + segment_id);
    seg = p.session->candidates()[static_cast<std::size_t>(index)];
    file = resolve(p, registry_entry(p, seg.recording_id).file);
  }
  const AudioClip clip = load_audio(file, seg.recording_id);
  const auto n = static_cast<long long>(clip.samples.size());
  const double sr = clip.sample_rate;
  const long long a = std::clamp<long long>(std::llround((seg.start_s - context_s) * sr), 0, n);
  const long long b = std::clamp<long long>(std::llround((seg.end_s + context_s) * sr), a, n);
  return encode_wav16(clip.samples.segment(a, b - a), clip.sample_rate);
}

json ProjectStore::segment_mel(const std::string& segment_id, double context_s) const {
  auto [p, index] = find_segment(segment_id);
  if (!(context_s >= 0.0)) throw InputError("context must be non-negative");
  std::shared_lock lock(p.mu);
  require_prepared(p);
  if (index < 0 || index >= static_cast<int>(p.session->candidates().size()))
    throw NotFoundError("unknown segment " + segment_id);
  const auto& seg = p.session->candidates()[static_cast<std::size_t>(index)];
  const PreparedRecording* rec = nullptr;
  for (const auto* c : {p.train.get(), p.test.get()})
    for (const auto& r : c->recordings)
      if (r.recording_id() == seg.recording_id) rec = &r;
  if (!rec || !rec->features) throw NotFoundError("no features stored for " + seg.recording_id);
  const auto& m = rec->features->values;
  const auto pad = static_cast<Eigen::Index>(std::llround(context_s / rec->hop_s()));
  const Eigen::Index a = std::max<Eigen::Index>(0, seg.start_frame - pad);
  const Eigen::Index b = std::min<Eigen::Index>(m.rows(), seg.end_frame + pad);
  std::vector<float> values(m.data() + a * m.cols(), m.data() + b * m.cols());
  return {{"T", b - a},
          {"B", m.cols()},
          {"hop_s", rec->hop_s()},
          {"start_s", static_cast<double>(a) * rec->hop_s()},
          {"values", values}};
}

void ProjectStore::wait_for_training(const std::string& project) const {
  Project& p = find(project);
  std::unique_lock<std::mutex> l(p.job_mu);
  p.job_cv.wait(l, [&p] { return p.job != JobState::kQueued && p.job != JobState::kRunning; });
}

void ProjectStore::enqueue_training(Project& p) {
  {
    std::lock_guard<std::mutex> l(p.job_mu);
    if (p.job == JobState::kQueued) return;
    if (p.job == JobState::kRunning) {
      p.rerun = true;
      return;
    }
    p.set_job(JobState::kQueued);
  }
  {
    std::lock_guard<std::mutex> l(queue_mu_);
    queue_.push_back(&p);
  }
  queue_cv_.notify_one();
}

void ProjectStore::worker_loop() {
  for (;;) {
    Project* job = nullptr;
    {
      std::unique_lock<std::mutex> l(queue_mu_);
      queue_cv_.wait(l, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      job = queue_.front();
      queue_.pop_front();
    }
    Project& p = *job;
    {
      std::lock_guard<std::mutex> l(p.job_mu);
      p.set_job(JobState::kRunning);
    }
    p.job_cv.notify_all();
    std::string error;
    try {
      std::optional<SedModel<float>> model;
      std::optional<ErReport> er;
      int round = 0;
      double labeled_s = 0.0, total_s = 0.0;
      {
        std::shared_lock lock(p.mu);
        require_prepared(p);
        round = p.session->rounds();
        labeled_s = p.session->labeled_duration_s();
        total_s = p.session->total_duration_s();
        model = p.session->train_model(round);
        if (has_ground_truth(p)) er = evaluate_model(*model, *p.test);
      }
      std::unique_lock lock(p.mu);
      write_file_atomic(p.dir / "model.sedm", encode_checkpoint(*model));
      p.session->set_model(std::move(model));
      p.trained_round = round;
      if (er) {
        json entry = {{"round", round},
                      {"labeled_duration_s", labeled_s},
                      {"labeled_fraction", labeled_s / total_s}};
        entry.update(er_to_json(*er));
        p.history.push_back(entry);
        write_file_atomic(p.dir / "metrics.json", json{{"history", p.history}}.dump(2) + "\n");
      }
      save_state(p);
    } catch (const std::exception& e) {
      error = e.what();
    }
    bool again = false;
    {
      std::lock_guard<std::mutex> l(p.job_mu);
      p.job_error = error;
      if (p.rerun) {
        p.rerun = false;
        again = true;
        p.set_job(JobState::kQueued);
      } else {
        p.set_job(error.empty() ? JobState::kIdle : JobState::kFailed);
      }
    }
    if (again) {
      std::lock_guard<std::mutex> l(queue_mu_);
      queue_.push_back(&p);
    }
    p.job_cv.notify_all();
  }
}

}  // namespace alsed
